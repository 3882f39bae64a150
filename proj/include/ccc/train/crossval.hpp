#pragma once

#include <span>
#include <string>
#include <vector>

#include "ccc/data/folds.hpp"
#include "ccc/eval/confusion.hpp"
#include "ccc/nn/checkpoint.hpp"
#include "ccc/train/train_config.hpp"

namespace ccc::train {

struct CrossValConfig {
  TrainConfig train;
  int k = 4;

  void validate() const;
  nlohmann::json to_json() const;
  static CrossValConfig from_json(const nlohmann::json& j);
};

struct OofPrediction {
  std::string ica_id;
  std::string patient_id;
  std::size_t epoch = 0;  // 1-based
  int fold = 0;
  double probability = 0.0;
  int label = 0;
};

struct CrossValResult {
  data::FoldAssignment folds;
  /// Out-of-fold predictions of every epoch, ordered by epoch then clip order.
  std::vector<OofPrediction> predictions;
  std::vector<double> pooled_accuracy;          // per epoch
  std::vector<std::vector<double>> train_loss;  // [fold][epoch]
  std::size_t selected_epoch = 0;               // 1-based
  eval::MetricsReport metrics;                  // at selected_epoch
  std::vector<nn::ModelCheckpoint> fold_checkpoints;

  std::vector<OofPrediction> predictions_at(std::size_t epoch) const;
};

/// 1-based argmax; ties go to the earliest epoch.
std::size_t select_best_epoch(std::span<const double> pooled_accuracy);

/// Patient-level k-fold training with per-epoch out-of-fold scoring. Fold f
/// uses seed + f. `pretrained` is required unless freeze is none.
CrossValResult run_crossval(const std::vector<data::Clip>& clips, const CrossValConfig& cfg,
                            const nn::ModelCheckpoint* pretrained);

}  // namespace ccc::train
