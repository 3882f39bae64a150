#include "ccc/train/crossval.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ccc/error.hpp"
#include "ccc/train/protonet.hpp"
#include "ccc/train/vanilla.hpp"

namespace ccc::train {

void CrossValConfig::validate() const {
  train.validate();
  if (k < 2) throw ConfigError("k", fmt::format("k must be >= 2, got {}", k));
}

nlohmann::json CrossValConfig::to_json() const {
  nlohmann::json j = train.to_json();
  j["k"] = k;
  return j;
}

CrossValConfig CrossValConfig::from_json(const nlohmann::json& j) {
  CrossValConfig c;
  c.train = TrainConfig::from_json(j);
  c.k = j.value("k", c.k);
  c.validate();
  return c;
}

std::vector<OofPrediction> CrossValResult::predictions_at(std::size_t epoch) const {
  std::vector<OofPrediction> out;
  for (const auto& p : predictions) {
    if (p.epoch == epoch) out.push_back(p);
  }
  return out;
}

std::size_t select_best_epoch(std::span<const double> acc) {
  if (acc.empty()) throw ValidationError(std::nullopt, "epochs", "no epochs to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < acc.size(); ++i) {
    if (acc[i] > acc[best]) best = i;
  }
  return best + 1;
}

CrossValResult run_crossval(const std::vector<data::Clip>& clips, const CrossValConfig& cfg,
                            const nn::ModelCheckpoint* pretrained) {
  cfg.validate();
  const TrainConfig& tc = cfg.train;
  if (tc.freeze != models::FreezeMode::none && !pretrained) {
    throw ConfigError("pretrained", fmt::format("freeze mode {} needs a pretrained checkpoint", models::to_string(tc.freeze)));
  }
  if (clips.empty()) throw ValidationError(std::nullopt, "clips", "cross-validation on an empty dataset");

  std::map<std::string, std::size_t> per_patient;
  for (const auto& c : clips) ++per_patient[c.patient_id];
  std::vector<data::PatientRecord> patients;
  for (const auto& [id, n] : per_patient) patients.push_back({id, n});

  CrossValResult result;
  result.folds = data::patient_kfold(patients, cfg.k, tc.seed);
  std::vector<int> fold_of(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) fold_of[i] = result.folds.fold(clips[i].patient_id);

  // With a frozen pretrained backbone every fold sees identical features.
  const bool frozen = tc.freeze == models::FreezeMode::pretrained_frozen;
  std::vector<nn::Tensor> cached;
  if (frozen) {
    models::Classifier probe(tc.classifier);
    nn::Rng rng(0);
    models::load_pretrained(probe, *pretrained, rng);
    cached.reserve(clips.size());
    for (const auto& c : clips) cached.push_back(clip_features(probe, c));
    spdlog::info("crossval: cached frozen backbone features for {} clips", clips.size());
  }

  std::vector<std::vector<double>> oof(tc.epochs, std::vector<double>(clips.size(), 0.0));
  std::vector<TrainResult> fold_runs;
  for (int f = 0; f < cfg.k; ++f) {
    TrainSet train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      if (fold_of[i] == f) {
        held.push_back(i);
      } else {
        train.clips.push_back(&clips[i]);
        if (frozen) train.features.push_back(&cached[i]);
      }
    }
    const auto labels = train.labels();
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (pos == 0 || pos == labels.size()) {
      throw ValidationError(std::nullopt, "fold",
                            fmt::format("fold {}: training part has {} positive of {} clips; both classes are required",
                                        f, pos, labels.size()));
    }

    const std::uint64_t fold_seed = tc.seed + static_cast<std::uint64_t>(f);
    models::Classifier model(tc.classifier);
    nn::Rng init_rng(nn::derive_seed(fold_seed, "init"));
    model.init(init_rng);
    if (tc.freeze != models::FreezeMode::none) models::load_pretrained(model, *pretrained, init_rng);
    models::apply_freeze(model, tc.freeze);
    nn::Rng train_rng(nn::derive_seed(fold_seed, "train"));
    spdlog::info("crossval fold {}: {} train / {} held-out clips", f, train.size(), held.size());
    TrainResult run = tc.mode == TrainMode::fsl ? train_fsl(model, train, tc, train_rng)
                                                : train_vanilla(model, train, tc, train_rng);

    std::vector<double> losses;
    for (std::size_t e = 0; e < run.snapshots.size(); ++e) {
      const EpochSnapshot& snap = run.snapshots[e];
      losses.push_back(snap.train_loss);
      restore_snapshot(model, snap);
      for (std::size_t i : held) oof[e][i] = predict_probability(model, snap.prototypes, clips[i], frozen ? &cached[i] : nullptr);
    }
    result.train_loss.push_back(std::move(losses));
    fold_runs.push_back(std::move(run));
  }

  const double threshold = tc.classifier.decision_threshold;
  for (std::size_t e = 0; e < tc.epochs; ++e) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const int label = clips[i].label_value();
      result.predictions.push_back({clips[i].ica_id, clips[i].patient_id, e + 1, fold_of[i], oof[e][i], label});
      if ((oof[e][i] > threshold) == (label == 1)) ++correct;
    }
    result.pooled_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(clips.size()));
  }
  result.selected_epoch = select_best_epoch(result.pooled_accuracy);
  std::vector<eval::Prediction> chosen;
  for (const auto& p : result.predictions_at(result.selected_epoch)) chosen.push_back({p.probability, p.label});
  result.metrics = eval::metrics(eval::confusion(chosen, threshold));
  spdlog::info("crossval: selected epoch {} pooled accuracy {:.4f}", result.selected_epoch,
               result.pooled_accuracy[result.selected_epoch - 1]);

  const std::string hash = nn::config_hash(cfg.to_json());
  for (int f = 0; f < cfg.k; ++f) {
    const EpochSnapshot& snap = fold_runs[static_cast<std::size_t>(f)].snapshots[result.selected_epoch - 1];
    models::Classifier model(tc.classifier);
    restore_snapshot(model, snap);
    std::vector<nn::NamedTensor> extras;
    if (snap.prototypes) extras.push_back({"prototypes", *snap.prototypes});
    nlohmann::json prov = {{"seed", tc.seed + static_cast<std::uint64_t>(f)},
                           {"fold", f},
                           {"epoch", result.selected_epoch},
                           {"epochs", tc.epochs},
                           {"mode", to_string(tc.mode)},
                           {"freeze", models::to_string(tc.freeze)},
                           {"config_hash", hash}};
    result.fold_checkpoints.push_back(model.to_checkpoint(std::move(prov), extras));
  }
  return result;
}

}  // namespace ccc::train
