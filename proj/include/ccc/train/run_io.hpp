#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/train/crossval.hpp"

namespace ccc::train {

/// Run directory layout:
///
///   config.json        fully resolved configuration
///   predictions.csv    ica_id,epoch,fold,probability,label for every epoch
///   result.json        selected_epoch, per-epoch pooled accuracy, metrics
///   fold_<f>.ckpt      classifier checkpoint of fold f at the selected epoch
void write_crossval_run(const std::filesystem::path& dir, const nlohmann::json& resolved_config,
                        const CrossValConfig& cfg, const CrossValResult& result);

nlohmann::ordered_json crossval_result_json(const CrossValConfig& cfg, const CrossValResult& result);

struct RunSummary {
  TrainMode mode = TrainMode::vanilla;
  models::FreezeMode freeze = models::FreezeMode::none;
  std::size_t selected_epoch = 0;
  eval::MetricsReport metrics;
};

RunSummary read_run_summary(const std::filesystem::path& dir);
std::vector<OofPrediction> read_predictions_csv(const std::filesystem::path& path);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& value);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace ccc::train
