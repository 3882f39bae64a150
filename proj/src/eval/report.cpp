#include "ccc/eval/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::eval {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

std::string pct(double v) { return fmt::format("{:.1f}", 100.0 * v); }

}  // namespace

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["sensitivity"] = m.sensitivity;
  j["specificity"] = m.specificity;
  j["counts"] = {{"tp", m.counts.tp}, {"fn", m.counts.fn}, {"tn", m.counts.tn}, {"fp", m.counts.fp}};
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.accuracy = j.at("accuracy").get<double>();
  m.sensitivity = j.at("sensitivity").get<double>();
  m.specificity = j.at("specificity").get<double>();
  const auto& c = j.at("counts");
  m.counts.tp = c.at("tp").get<std::size_t>();
  m.counts.fn = c.at("fn").get<std::size_t>();
  m.counts.tn = c.at("tn").get<std::size_t>();
  m.counts.fp = c.at("fp").get<std::size_t>();
  return m;
}

std::string table_row(const ConfigurationResult& r) {
  return fmt::format("{},{},{},{},{},{}", r.model, r.pretrain ? "yes" : "no", r.freeze ? "yes" : "no",
                     pct(r.metrics.accuracy), pct(r.metrics.sensitivity), pct(r.metrics.specificity));
}

nlohmann::ordered_json report_to_json(const ReportBundle& bundle) {
  nlohmann::ordered_json doc;
  doc["format"] = "ccc-metrics";
  doc["version"] = 1;
  doc["configurations"] = nlohmann::ordered_json::array();
  for (const auto& r : bundle.configurations) {
    nlohmann::ordered_json row;
    row["model"] = r.model;
    row["pretrain"] = r.pretrain;
    row["freeze"] = r.freeze;
    row["selected_epoch"] = r.selected_epoch;
    row["metrics"] = metrics_to_json(r.metrics);
    doc["configurations"].push_back(std::move(row));
  }
  doc["subgroups"] = nlohmann::ordered_json::array();
  for (const auto& s : bundle.subgroups) {
    nlohmann::ordered_json sj;
    sj["grouping"] = to_string(s.grouping);
    if (s.cuts) sj["cuts"] = {s.cuts->first, s.cuts->second};
    sj["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : s.groups) {
      nlohmann::ordered_json gj;
      gj["label"] = g.label;
      gj["n"] = g.n;
      gj["tp"] = g.tp;
      gj["fn"] = g.fn;
      gj["sensitivity"] = g.sensitivity ? nlohmann::ordered_json(*g.sensitivity) : nlohmann::ordered_json();
      sj["groups"].push_back(std::move(gj));
    }
    sj["exclusions"] = nlohmann::ordered_json::array();
    for (const auto& e : s.exclusions) sj["exclusions"].push_back({{"ica_id", e.ica_id}, {"reason", e.reason}});
    doc["subgroups"].push_back(std::move(sj));
  }
  return doc;
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_text(dir / "metrics.json", report_to_json(bundle).dump(2) + "\n");

  std::string table = "Model,Pretrain,Freeze,Acc,Sens,Spec\n";
  for (const auto& r : bundle.configurations) table += table_row(r) + "\n";
  write_text(dir / "tables.csv", table);

  for (const auto& s : bundle.subgroups) {
    std::string csv = "Group,Samples,TP,FN,Sens\n";
    for (const auto& g : s.groups) {
      csv += fmt::format("{},{},{},{},{}\n", g.label, g.n, g.tp, g.fn, g.sensitivity ? pct(*g.sensitivity) : "");
    }
    write_text(dir / fmt::format("subgroup_{}.csv", to_string(s.grouping)), csv);
  }
}

std::vector<ConfigurationResult> configurations_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "ccc-metrics") throw ValidationError(std::nullopt, "format", "not a ccc-metrics document");
  std::vector<ConfigurationResult> out;
  const auto& rows = doc.at("configurations");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      ConfigurationResult r;
      r.model = rows[i].at("model").get<std::string>();
      r.pretrain = rows[i].at("pretrain").get<bool>();
      r.freeze = rows[i].at("freeze").get<bool>();
      r.selected_epoch = rows[i].at("selected_epoch").get<std::size_t>();
      r.metrics = metrics_from_json(rows[i].at("metrics"));
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(i, "configurations", fmt::format("configuration {}: {}", i, e.what()));
    }
  }
  return out;
}

std::vector<ConfigurationResult> parse_metrics_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::nullopt, "json", fmt::format("{}: {}", path.string(), e.what()));
  }
  return configurations_from_json(doc);
}

}  // namespace ccc::eval
