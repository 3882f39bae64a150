#include "ccc/cli/dispatch.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ccc/cli/logging.hpp"
#include "ccc/data/synth.hpp"
#include "ccc/error.hpp"
#include "ccc/eval/report.hpp"
#include "ccc/nn/grad_suite.hpp"
#include "ccc/train/clips.hpp"
#include "ccc/train/crossval.hpp"
#include "ccc/train/pretrain.hpp"
#include "ccc/train/protonet.hpp"
#include "ccc/train/run_io.hpp"
#include "ccc/train/vanilla.hpp"

namespace ccc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Kind { uint, real, text, flag };

// Every key a config file may carry; flags with the same name override it.
const std::map<std::string, Kind>& known_keys() {
  static const std::map<std::string, Kind> keys = {
      {"seed", Kind::uint},           {"data", Kind::text},          {"out", Kind::text},
      {"pretrained", Kind::text},     {"run", Kind::text},           {"mode", Kind::text},
      {"freeze", Kind::text},         {"epochs", Kind::uint},        {"k", Kind::uint},
      {"learning_rate", Kind::real},  {"batch_size", Kind::uint},    {"k_shot", Kind::uint},
      {"n_query", Kind::uint},        {"episodes_per_epoch", Kind::uint}, {"patience", Kind::uint},
      {"n", Kind::uint},              {"positive_ratio", Kind::real}, {"image_size", Kind::uint},
      {"frames", Kind::uint},         {"icas_per_patient", Kind::uint}, {"noise_std", Kind::real},
      {"collateral_radius_min", Kind::real}, {"collateral_radius_max", Kind::real}, {"hard", Kind::flag},
      {"tolerance", Kind::real}};
  return keys;
}

void check_types(const json& cfg) {
  for (const auto& [key, value] : cfg.items()) {
    auto it = known_keys().find(key);
    if (it == known_keys().end()) throw ConfigError(key, fmt::format("unknown config key '{}'", key));
    bool ok = false;
    switch (it->second) {
      case Kind::uint: ok = value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0); break;
      case Kind::real: ok = value.is_number(); break;
      case Kind::text: ok = value.is_string(); break;
      case Kind::flag: ok = value.is_boolean(); break;
    }
    if (!ok) throw ConfigError(key, fmt::format("config key '{}' has the wrong type: {}", key, value.dump()));
  }
}

/// Options shared by the subcommands; each records whether it was given.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file (flat keys; flags override)");
  }

  template <typename T>
  void add(const std::string& key, const std::string& desc) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option("--" + option_name(key), *value, desc);
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
  }

  void add_flag(const std::string& key, const std::string& desc) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag("--" + option_name(key), *value, desc);
    apply_.push_back([opt, value, key](json& j) {
      if (opt->count()) j[key] = *value;
    });
  }

  json resolve() const {
    json cfg = json::object();
    if (!config_path_.empty()) {
      cfg = train::read_json_file(config_path_);
      if (!cfg.is_object()) throw ConfigError("config", "config file must hold a JSON object");
    }
    for (const auto& f : apply_) f(cfg);
    check_types(cfg);
    return cfg;
  }

 private:
  static std::string option_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

  CLI::App* app_;
  std::string config_path_;
  std::vector<std::function<void(json&)>> apply_;
};

std::string require_text(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError(key, fmt::format("missing required setting '{}' (flag --{})", key, key));
  return cfg.at(key).get<std::string>();
}

fs::path ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", p.string(), ec.message()));
  return p;
}

std::string model_label(train::TrainMode mode) { return mode == train::TrainMode::fsl ? "FSL" : "Classic"; }

// ---- gen-synth ------------------------------------------------------------

data::SynthConfig synth_config(const json& cfg) {
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  data::SynthConfig s = cfg.value("hard", false) ? data::SynthConfig::hard(seed) : data::SynthConfig{};
  s.seed = seed;
  s.n_sequences = cfg.value("n", s.n_sequences);
  s.positive_ratio = cfg.value("positive_ratio", s.positive_ratio);
  s.image_size = cfg.value("image_size", s.image_size);
  s.frames_per_sequence = cfg.value("frames", s.frames_per_sequence);
  s.icas_per_patient = cfg.value("icas_per_patient", s.icas_per_patient);
  s.noise_std = cfg.value("noise_std", s.noise_std);
  s.collateral_radius_min = cfg.value("collateral_radius_min", s.collateral_radius_min);
  s.collateral_radius_max = cfg.value("collateral_radius_max", s.collateral_radius_max);
  s.validate();
  return s;
}

int cmd_gen_synth(const json& cfg) {
  const data::SynthConfig s = synth_config(cfg);
  const fs::path out = require_text(cfg, "out");
  const data::SynthDataset ds = data::synth_generate(s);
  data::write_synth_dataset(ds, out);
  train::write_json_file(out / "config.json", s.to_json());
  spdlog::info("gen-synth: wrote {} sequences ({} positive) to {}", ds.samples.size(), ds.positives(), out.string());
  return 0;
}

// ---- pretrain -------------------------------------------------------------

int cmd_pretrain(const json& cfg) {
  train::PretrainConfig pc;
  pc.seed = cfg.value("seed", pc.seed);
  pc.max_epochs = cfg.value("epochs", pc.max_epochs);
  pc.patience = cfg.value("patience", pc.patience);
  pc.learning_rate = cfg.value("learning_rate", pc.learning_rate);
  pc.batch_size = cfg.value("batch_size", pc.batch_size);
  pc.validate();
  const fs::path data_dir = require_text(cfg, "data");
  const fs::path out = ensure_dir(require_text(cfg, "out"));
  const auto sequences = data::read_sequence_store(data_dir);
  const train::PretrainResult r = train::pretrain_segmentation(sequences, pc);

  nlohmann::ordered_json resolved;
  resolved["data"] = data_dir.string();
  resolved["out"] = out.string();
  resolved["pretrain"] = pc.to_json();
  train::write_json_file(out / "config.json", resolved);
  nn::save_checkpoint(r.checkpoint(pc), out / "segmentation.ckpt");

  nlohmann::ordered_json res;
  res["best_epoch"] = r.best_epoch;
  res["epochs_run"] = r.history.size();
  res["test_loss"] = r.test_loss;
  res["test"] = {{"dice", r.test.dice}, {"sensitivity", r.test.sensitivity}, {"specificity", r.test.specificity}};
  res["split"] = {{"train", r.split.train.size()}, {"val", r.split.val.size()}, {"test", r.split.test.size()}};
  res["history"] = nlohmann::ordered_json::array();
  for (const auto& h : r.history) res["history"].push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_loss", h.val_loss}});
  train::write_json_file(out / "pretrain_result.json", res);
  std::cout << fmt::format("test dice {:.4f} sensitivity {:.4f} specificity {:.4f} (best epoch {})\n", r.test.dice,
                           r.test.sensitivity, r.test.specificity, r.best_epoch);
  return 0;
}

// ---- train / crossval -----------------------------------------------------

train::TrainConfig train_config(const json& cfg) {
  json j = json::object();
  for (const char* key : {"seed", "epochs", "learning_rate", "batch_size", "mode", "freeze", "k_shot", "n_query",
                          "episodes_per_epoch"}) {
    if (cfg.contains(key)) j[key] = cfg.at(key);
  }
  return train::TrainConfig::from_json(j);
}

struct PreparedData {
  std::vector<data::Clip> clips;
  std::map<std::string, data::CccAnnotation> annotations;
  nn::ModelCheckpoint pretrained;
};

PreparedData prepare(const json& cfg) {
  const fs::path data_dir = require_text(cfg, "data");
  if (!cfg.contains("pretrained")) {
    throw ConfigError("pretrained", "a segmentation checkpoint (--pretrained) is needed to pick no-CCC clips by vesselness");
  }
  PreparedData p;
  p.pretrained = nn::load_checkpoint(cfg.at("pretrained").get<std::string>());
  const models::Segmenter seg = models::Segmenter::from_checkpoint(p.pretrained);
  const train::LoadedDataset ds = train::load_dataset(data_dir);
  p.annotations = train::index_annotations(ds.annotations);
  p.clips = train::build_clips(ds.sequences, p.annotations, seg);
  spdlog::info("prepared {} clips from {}", p.clips.size(), data_dir.string());
  return p;
}

int cmd_train(const json& cfg) {
  const train::TrainConfig tc = train_config(cfg);
  const fs::path out = ensure_dir(require_text(cfg, "out"));
  const PreparedData p = prepare(cfg);

  models::Classifier model(tc.classifier);
  nn::Rng init_rng(nn::derive_seed(tc.seed, "init"));
  model.init(init_rng);
  if (tc.freeze != models::FreezeMode::none) models::load_pretrained(model, p.pretrained, init_rng);
  models::apply_freeze(model, tc.freeze);

  train::TrainSet set;
  std::vector<nn::Tensor> feats;
  for (const auto& c : p.clips) set.clips.push_back(&c);
  if (tc.freeze == models::FreezeMode::pretrained_frozen) {
    for (const auto& c : p.clips) feats.push_back(train::clip_features(model, c));
    for (const auto& f : feats) set.features.push_back(&f);
  }
  nn::Rng rng(nn::derive_seed(tc.seed, "train"));
  const train::TrainResult r =
      tc.mode == train::TrainMode::fsl ? train::train_fsl(model, set, tc, rng) : train::train_vanilla(model, set, tc, rng);
  const train::EpochSnapshot& last = r.snapshots.back();
  train::restore_snapshot(model, last);
  std::vector<nn::NamedTensor> extras;
  if (last.prototypes) extras.push_back({"prototypes", *last.prototypes});
  nlohmann::json prov = {{"seed", tc.seed}, {"epochs", tc.epochs}, {"mode", train::to_string(tc.mode)},
                         {"freeze", models::to_string(tc.freeze)}, {"config_hash", nn::config_hash(tc.to_json())}};
  nn::save_checkpoint(model.to_checkpoint(prov, extras), out / "classifier.ckpt");

  nlohmann::ordered_json resolved;
  resolved["data"] = cfg.at("data");
  resolved["pretrained"] = cfg.at("pretrained");
  resolved["out"] = out.string();
  resolved["train"] = tc.to_json();
  train::write_json_file(out / "config.json", resolved);
  nlohmann::ordered_json res;
  res["epochs"] = tc.epochs;
  res["train_loss"] = nlohmann::ordered_json::array();
  for (const auto& s : r.snapshots) res["train_loss"].push_back(s.train_loss);
  train::write_json_file(out / "train_result.json", res);
  std::cout << fmt::format("final training loss {:.6f}\n", last.train_loss);
  return 0;
}

int cmd_crossval(const json& cfg) {
  const fs::path out = ensure_dir(require_text(cfg, "out"));
  const int k = static_cast<int>(cfg.value("k", 4u));
  std::vector<train::TrainMode> modes = {train::TrainMode::vanilla, train::TrainMode::fsl};
  std::vector<models::FreezeMode> freezes = {models::FreezeMode::none, models::FreezeMode::pretrained_unfrozen,
                                             models::FreezeMode::pretrained_frozen};
  if (cfg.contains("mode")) modes = {train::parse_train_mode(cfg.at("mode").get<std::string>())};
  if (cfg.contains("freeze")) freezes = {models::parse_freeze_mode(cfg.at("freeze").get<std::string>())};
  const bool single = modes.size() == 1 && freezes.size() == 1;
  // Fail on bad settings before the (slow) clip preparation.
  train_config(cfg);
  const PreparedData p = prepare(cfg);

  eval::ReportBundle bundle;
  for (auto mode : modes) {
    for (auto freeze : freezes) {
      json run_cfg = cfg;
      run_cfg["mode"] = train::to_string(mode);
      run_cfg["freeze"] = models::short_name(freeze);
      train::CrossValConfig cv;
      cv.train = train_config(run_cfg);
      cv.k = k;
      cv.validate();
      const fs::path dir = single ? out : out / fmt::format("{}_{}", train::to_string(mode), models::short_name(freeze));
      spdlog::info("crossval: {} / {}", train::to_string(mode), models::to_string(freeze));
      const train::CrossValResult r = train::run_crossval(p.clips, cv, &p.pretrained);
      nlohmann::ordered_json resolved;
      resolved["data"] = cfg.at("data");
      resolved["pretrained"] = cfg.at("pretrained");
      resolved["out"] = dir.string();
      resolved["crossval"] = cv.to_json();
      train::write_crossval_run(dir, resolved, cv, r);
      bundle.configurations.push_back({model_label(mode), freeze != models::FreezeMode::none,
                                       freeze == models::FreezeMode::pretrained_frozen, r.selected_epoch, r.metrics});
      std::cout << fmt::format("{} pretrain={} freeze={} selected_epoch={} acc={:.4f} sens={:.4f} spec={:.4f}\n",
                               model_label(mode), freeze != models::FreezeMode::none ? "yes" : "no",
                               freeze == models::FreezeMode::pretrained_frozen ? "yes" : "no", r.selected_epoch,
                               r.metrics.accuracy, r.metrics.sensitivity, r.metrics.specificity);
    }
  }
  if (!single) {
    train::write_json_file(out / "config.json", cfg);
    eval::emit_report(bundle, out);
  }
  return 0;
}

// ---- evaluate / subgroups -------------------------------------------------

std::vector<fs::path> run_dirs(const fs::path& run) {
  if (fs::exists(run / "result.json")) return {run};
  std::vector<fs::path> dirs;
  if (fs::is_directory(run)) {
    for (const auto& e : fs::directory_iterator(run)) {
      if (e.is_directory() && fs::exists(e.path() / "result.json")) dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError(fmt::format("no crossval result.json under {}", run.string()));
  return dirs;
}

struct ScoredRun {
  fs::path dir;
  eval::ConfigurationResult config;
  std::vector<train::OofPrediction> selected;
};

ScoredRun score_run(const fs::path& dir) {
  const train::RunSummary s = train::read_run_summary(dir);
  ScoredRun out;
  out.dir = dir;
  std::vector<eval::Prediction> preds;
  for (auto& p : train::read_predictions_csv(dir / "predictions.csv")) {
    if (p.epoch != s.selected_epoch) continue;
    preds.push_back({p.probability, p.label});
    out.selected.push_back(std::move(p));
  }
  out.config = {model_label(s.mode), s.freeze != models::FreezeMode::none,
                s.freeze == models::FreezeMode::pretrained_frozen, s.selected_epoch,
                eval::metrics(eval::confusion(preds))};
  return out;
}

int cmd_evaluate(const json& cfg) {
  if (!cfg.contains("run")) {
    // Segmentation evaluation of a checkpoint over every frame of a dataset.
    const fs::path data_dir = require_text(cfg, "data");
    const models::Segmenter seg = models::Segmenter::from_checkpoint(nn::load_checkpoint(require_text(cfg, "pretrained")));
    eval::PixelCounts pooled;
    std::size_t frames = 0;
    for (const auto& s : data::read_sequence_store(data_dir)) {
      if (s.centerlines.size() != s.sequence.frames.size()) {
        throw ValidationError(std::nullopt, "centerlines", fmt::format("{} has no per-frame centerlines", s.sequence.ica_id));
      }
      for (std::size_t f = 0; f < s.sequence.frames.size(); ++f, ++frames) {
        const auto& frame = s.sequence.frames[f];
        const nn::Tensor x = train::segmentation_input(frame).reshaped({1, 1, frame.dim(0), frame.dim(1)});
        const nn::Tensor gt = data::gaussian_mask(s.centerlines[f], frame.dim(0), frame.dim(1));
        pooled += eval::pixel_counts(seg.predict(x).reshaped(gt.shape()), gt);
      }
    }
    const eval::DiceResult d = eval::dice_from_counts(pooled);
    nlohmann::ordered_json res;
    res["frames"] = frames;
    res["dice"] = d.dice;
    res["sensitivity"] = d.sensitivity;
    res["specificity"] = d.specificity;
    if (cfg.contains("out")) train::write_json_file(ensure_dir(cfg.at("out").get<std::string>()) / "segmentation_eval.json", res);
    std::cout << res.dump() << "\n";
    return 0;
  }
  const fs::path run = cfg.at("run").get<std::string>();
  const fs::path out = cfg.contains("out") ? fs::path(cfg.at("out").get<std::string>()) : run;
  eval::ReportBundle bundle;
  for (const auto& dir : run_dirs(run)) {
    ScoredRun s = score_run(dir);
    std::cout << eval::table_row(s.config) << "\n";
    bundle.configurations.push_back(std::move(s.config));
  }
  eval::emit_report(bundle, out);
  return 0;
}

int cmd_subgroups(const json& cfg) {
  const fs::path run = require_text(cfg, "run");
  const fs::path data_dir = require_text(cfg, "data");
  const fs::path out = cfg.contains("out") ? fs::path(cfg.at("out").get<std::string>()) : run / "subgroups";
  std::optional<ScoredRun> best;
  for (const auto& dir : run_dirs(run)) {
    ScoredRun s = score_run(dir);
    if (!best || s.config.metrics.accuracy > best->config.metrics.accuracy) best = std::move(s);
  }
  const train::LoadedDataset ds = train::load_dataset(data_dir);
  const auto annotations = train::index_annotations(ds.annotations);
  std::vector<eval::PositiveCase> cases;
  for (const auto& p : best->selected) {
    if (p.label == 1) cases.push_back({p.ica_id, p.probability});
  }
  eval::ReportBundle bundle;
  bundle.configurations.push_back(best->config);
  for (auto g : {eval::Grouping::rentrop, eval::Grouping::flow_grade, eval::Grouping::size_tercile}) {
    bundle.subgroups.push_back(eval::subgroup_sensitivity(cases, annotations, g));
    for (const auto& e : bundle.subgroups.back().exclusions) {
      spdlog::warn("subgroups {}: excluded {} ({})", eval::to_string(g), e.ica_id, e.reason);
    }
  }
  eval::emit_report(bundle, out);
  train::write_json_file(out / "config.json", cfg);
  std::cout << fmt::format("subgroups of {} written to {}\n", best->dir.string(), out.string());
  return 0;
}

// ---- grad-check -----------------------------------------------------------

int cmd_grad_check(const json& cfg) {
  nn::GradCheckOptions opt;
  opt.tolerance = cfg.value("tolerance", opt.tolerance);
  const auto results = nn::layer_grad_suite(cfg.value("seed", std::uint64_t{0}), opt);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.report.passed();
    std::cout << fmt::format("{:<18} max_rel_error {:.3e} {}\n", r.layer, r.report.worst_rel_error(),
                             r.report.passed() ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

void report_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json j = {{"error", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  init_logging();
  CLI::App app{"Coronary collateral detection pipeline"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  struct Command {
    CLI::App* app;
    std::unique_ptr<Flags> flags;
    std::function<int(const json&)> run;
  };
  std::vector<Command> commands;
  auto add = [&](const std::string& name, const std::string& desc, std::function<int(const json&)> run) -> Flags& {
    CLI::App* sub = app.add_subcommand(name, desc);
    commands.push_back({sub, std::make_unique<Flags>(sub), std::move(run)});
    Flags& f = *commands.back().flags;
    f.add<std::uint64_t>("seed", "global seed");
    f.add<std::string>("out", "output directory");
    return f;
  };

  Flags& gen = add("gen-synth", "generate a synthetic angiography dataset", cmd_gen_synth);
  gen.add<std::uint64_t>("n", "number of sequences");
  gen.add<double>("positive_ratio", "fraction of CCC-positive sequences");
  gen.add<std::uint64_t>("image_size", "frame height and width in pixels");
  gen.add<std::uint64_t>("frames", "frames per sequence");
  gen.add<std::uint64_t>("icas_per_patient", "sequences per patient");
  gen.add<double>("noise_std", "background noise standard deviation");
  gen.add_flag("hard", "harder variant: more noise, thinner collaterals");

  Flags& pre = add("pretrain", "train the segmentation backbone on centerline masks", cmd_pretrain);
  pre.add<std::string>("data", "sequence store with per-frame centerlines");
  pre.add<std::uint64_t>("epochs", "maximum epochs");
  pre.add<std::uint64_t>("patience", "early-stopping patience in epochs");
  pre.add<double>("learning_rate", "Adam learning rate");
  pre.add<std::uint64_t>("batch_size", "frames per batch");

  for (const auto& [name, desc, run] :
       {std::tuple<const char*, const char*, std::function<int(const json&)>>{"train", "train one classifier on the whole dataset", cmd_train},
        std::tuple<const char*, const char*, std::function<int(const json&)>>{"crossval", "patient-level k-fold cross-validation (six-configuration grid by default)", cmd_crossval}}) {
    Flags& f = add(name, desc, run);
    f.add<std::string>("data", "dataset directory (sequence store + annotations.json)");
    f.add<std::string>("pretrained", "segmentation checkpoint");
    f.add<std::string>("mode", "vanilla or fsl");
    f.add<std::string>("freeze", "none, unfrozen or frozen");
    f.add<std::uint64_t>("epochs", "training epochs");
    f.add<double>("learning_rate", "Adam learning rate");
    f.add<std::uint64_t>("batch_size", "clips per batch (vanilla)");
    f.add<std::uint64_t>("episodes_per_epoch", "episodes per epoch (fsl)");
    f.add<std::uint64_t>("k_shot", "support clips per class (fsl)");
    f.add<std::uint64_t>("n_query", "query clips per class (fsl)");
    if (std::string(name) == "crossval") f.add<std::uint64_t>("k", "number of folds");
  }

  Flags& ev = add("evaluate", "recompute metrics of crossval runs, or Dice of a segmentation checkpoint", cmd_evaluate);
  ev.add<std::string>("run", "crossval output directory");
  ev.add<std::string>("data", "dataset directory (segmentation evaluation)");
  ev.add<std::string>("pretrained", "segmentation checkpoint (segmentation evaluation)");

  Flags& sg = add("subgroups", "per-subgroup sensitivity of the best crossval configuration", cmd_subgroups);
  sg.add<std::string>("run", "crossval output directory");
  sg.add<std::string>("data", "dataset directory with annotations.json");

  Flags& gc = add("grad-check", "finite-difference gradient checks of every layer", cmd_grad_check);
  gc.add<double>("tolerance", "relative error tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& c : commands) {
      if (c.app->parsed()) return c.run(c.flags->resolve());
    }
    return 2;
  } catch (const ConfigError& e) {
    report_error(e.kind(), e.what(), {{"field", e.field()}});
  } catch (const ValidationError& e) {
    json extra = {{"field", e.field()}};
    if (e.record()) extra["record"] = *e.record();
    report_error(e.kind(), e.what(), extra);
  } catch (const ShapeError& e) {
    report_error(e.kind(), e.what(), {{"dimension", e.dimension()}});
  } catch (const UndefinedMetricError& e) {
    report_error(e.kind(), e.what(), {{"metric", e.metric()}});
  } catch (const Error& e) {
    report_error(e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    report_error("config", e.what());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
  }
  return 1;
}

}  // namespace ccc::cli
