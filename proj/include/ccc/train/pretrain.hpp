#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/data/mask.hpp"
#include "ccc/data/sequence_store.hpp"
#include "ccc/eval/dice.hpp"
#include "ccc/models/segmenter.hpp"

namespace ccc::train {

struct PretrainConfig {
  std::size_t max_epochs = 100;
  /// Stop after this many epochs without a new validation minimum.
  std::size_t patience = 10;
  double learning_rate = 1e-3;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  data::MaskConfig mask;
  models::BackboneConfig backbone;

  void validate() const;
  nlohmann::json to_json() const;
  static PretrainConfig from_json(const nlohmann::json& j);
};

struct SequenceSplit {
  std::vector<std::size_t> train, val, test;
};

/// Seeded shuffle of sequence indices cut into train/val/test by rounded
/// fractions; throws if any part would be empty.
SequenceSplit split_sequences(std::size_t n, double train_fraction, double val_fraction, std::uint64_t seed);

struct PretrainEpoch {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct PretrainResult {
  models::Segmenter model;
  std::vector<PretrainEpoch> history;
  std::size_t best_epoch = 0;
  SequenceSplit split;
  double test_loss = 0.0;
  /// Pixel counts pooled over every test frame, both maps binarized at 0.5.
  eval::DiceResult test;

  nn::ModelCheckpoint checkpoint(const PretrainConfig& cfg) const;
};

/// Segmentation input: one frame z-scored on its own pixels.
nn::Tensor segmentation_input(const nn::Tensor& frame);

/// MSE regression of gaussian_mask targets with early stopping on validation
/// loss. Every sequence must carry one CenterlineSet per frame.
PretrainResult pretrain_segmentation(const std::vector<data::StoredSequence>& sequences, const PretrainConfig& cfg);

}  // namespace ccc::train
