#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/eval/confusion.hpp"
#include "ccc/eval/subgroups.hpp"

namespace ccc::eval {

struct ConfigurationResult {
  std::string model;  // "Classic" or "FSL"
  bool pretrain = false;
  bool freeze = false;
  std::size_t selected_epoch = 0;
  MetricsReport metrics;

  bool operator==(const ConfigurationResult&) const = default;
};

struct ReportBundle {
  std::vector<ConfigurationResult> configurations;
  std::vector<SubgroupReport> subgroups;
};

/// Writes metrics.json, tables.csv and one subgroup_<grouping>.csv per
/// subgroup report into `dir`. Output is a pure function of `bundle`.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

nlohmann::ordered_json report_to_json(const ReportBundle& bundle);
/// Reads back the configurations of a metrics.json document.
std::vector<ConfigurationResult> configurations_from_json(const nlohmann::json& doc);
std::vector<ConfigurationResult> parse_metrics_file(const std::filesystem::path& path);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

/// Table row with percentages at one decimal: Model,Pretrain,Freeze,Acc,Sens,Spec.
std::string table_row(const ConfigurationResult& r);

}  // namespace ccc::eval
