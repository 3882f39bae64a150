#pragma once

#include <span>
#include <vector>

#include "ccc/nn/rng.hpp"
#include "ccc/nn/tensor.hpp"
#include "ccc/train/train_config.hpp"

namespace ccc::train {

/// Per-class mean of embeddings [N,D] -> [n_way,D]. Throws if a class is empty.
nn::Tensor class_prototypes(const nn::Tensor& embeddings, std::span<const int> labels, std::size_t n_way);

/// softmax(−‖e − p_c‖²) over the prototype rows.
std::vector<double> class_probabilities(std::span<const float> embedding, const nn::Tensor& prototypes);

/// Probability of the CCC class (row 1). Throws unless prototypes is [2,D]
/// with D matching the embedding.
double fsl_predict(std::span<const float> embedding, const nn::Tensor& prototypes);

struct ProtoLoss {
  double loss = 0.0;     // mean cross-entropy over queries
  double accuracy = 0.0;  // fraction of queries whose nearest prototype is their class
  nn::Tensor grad_support;  // [S,D]
  nn::Tensor grad_query;    // [Q,D]
};

/// Prototypes from the support rows, cross-entropy of softmax over negative
/// squared distances for the query rows, with gradients for both.
ProtoLoss prototypical_loss(const nn::Tensor& support, std::span<const int> support_labels, const nn::Tensor& query,
                            std::span<const int> query_labels, std::size_t n_way);

struct Episode {
  std::vector<std::size_t> support;  // indices into the training set, grouped by class
  std::vector<int> support_labels;
  std::vector<std::size_t> query;
  std::vector<int> query_labels;
};

/// Draws k_shot + n_query distinct items per class. Throws ValidationError if
/// a class has too few items.
Episode sample_episode(std::span<const int> labels, const EpisodeConfig& cfg, nn::Rng& rng);

/// Episodic prototypical training; each snapshot carries the inference
/// prototypes computed over the whole training set after that epoch.
TrainResult train_fsl(models::Classifier& model, const TrainSet& set, const TrainConfig& cfg, nn::Rng& rng);

}  // namespace ccc::train
