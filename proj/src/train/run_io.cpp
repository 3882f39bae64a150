#include "ccc/train/run_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ccc/error.hpp"
#include "ccc/eval/report.hpp"

namespace ccc::train {

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << value.dump(2) << '\n';
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::nullopt, "json", fmt::format("{}: {}", path.string(), e.what()));
  }
}

nlohmann::ordered_json crossval_result_json(const CrossValConfig& cfg, const CrossValResult& r) {
  nlohmann::ordered_json j;
  j["format"] = "ccc-crossval-result";
  j["version"] = 1;
  j["mode"] = to_string(cfg.train.mode);
  j["freeze"] = models::to_string(cfg.train.freeze);
  j["k"] = cfg.k;
  j["seed"] = cfg.train.seed;
  j["epochs"] = cfg.train.epochs;
  j["config_hash"] = nn::config_hash(cfg.to_json());
  j["selected_epoch"] = r.selected_epoch;
  j["pooled_accuracy"] = r.pooled_accuracy;
  j["metrics"] = eval::metrics_to_json(r.metrics);
  j["fold_sizes"] = r.folds.fold_sizes();
  j["train_loss"] = r.train_loss;
  return j;
}

void write_crossval_run(const std::filesystem::path& dir, const nlohmann::json& resolved_config,
                        const CrossValConfig& cfg, const CrossValResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_json_file(dir / "config.json", resolved_config);
  std::string csv = "ica_id,epoch,fold,probability,label\n";
  for (const auto& p : r.predictions) csv += fmt::format("{},{},{},{},{}\n", p.ica_id, p.epoch, p.fold, p.probability, p.label);
  {
    std::ofstream out(dir / "predictions.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", (dir / "predictions.csv").string()));
    out << csv;
  }
  write_json_file(dir / "result.json", crossval_result_json(cfg, r));
  for (std::size_t f = 0; f < r.fold_checkpoints.size(); ++f) {
    nn::save_checkpoint(r.fold_checkpoints[f], dir / fmt::format("fold_{}.ckpt", f));
  }
}

RunSummary read_run_summary(const std::filesystem::path& dir) {
  const nlohmann::json j = read_json_file(dir / "result.json");
  try {
    RunSummary s;
    s.mode = parse_train_mode(j.at("mode").get<std::string>());
    s.freeze = models::parse_freeze_mode(j.at("freeze").get<std::string>());
    s.selected_epoch = j.at("selected_epoch").get<std::size_t>();
    s.metrics = eval::metrics_from_json(j.at("metrics"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::nullopt, "result", fmt::format("{}: {}", (dir / "result.json").string(), e.what()));
  }
}

std::vector<OofPrediction> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::string line;
  std::getline(in, line);
  if (line != "ica_id,epoch,fold,probability,label") {
    throw ValidationError(std::nullopt, "header", fmt::format("{}: unexpected header '{}'", path.string(), line));
  }
  std::vector<OofPrediction> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[5];
    for (auto& c : cell) std::getline(ss, c, ',');
    try {
      OofPrediction p;
      p.ica_id = cell[0];
      p.epoch = std::stoul(cell[1]);
      p.fold = std::stoi(cell[2]);
      p.probability = std::stod(cell[3]);
      p.label = std::stoi(cell[4]);
      out.push_back(std::move(p));
    } catch (const std::exception&) {
      throw ValidationError(row, "row", fmt::format("{}: malformed row {}: '{}'", path.string(), row, line));
    }
    ++row;
  }
  return out;
}

}  // namespace ccc::train
