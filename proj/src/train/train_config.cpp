#include "ccc/train/train_config.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ccc/error.hpp"
#include "ccc/nn/layers.hpp"
#include "ccc/train/protonet.hpp"

namespace ccc::train {
namespace {

constexpr std::size_t kChunk = 4;

}  // namespace

TrainMode parse_train_mode(const std::string& text) {
  if (text == "vanilla") return TrainMode::vanilla;
  if (text == "fsl") return TrainMode::fsl;
  throw ConfigError("mode", fmt::format("unknown mode '{}' (expected vanilla or fsl)", text));
}

std::string to_string(TrainMode mode) { return mode == TrainMode::fsl ? "fsl" : "vanilla"; }

void EpisodeConfig::validate() const {
  if (n_way != 2) throw ConfigError("n_way", fmt::format("n_way must be 2 for the binary task, got {}", n_way));
  if (k_shot < 1) throw ConfigError("k_shot", "k_shot must be >= 1");
  if (n_query < 1) throw ConfigError("n_query", "n_query must be >= 1");
  if (episodes_per_epoch < 1) throw ConfigError("episodes_per_epoch", "episodes_per_epoch must be >= 1");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs", fmt::format("epochs must be >= 1, got {}", epochs));
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size", "batch_size must be >= 1");
  episodes.validate();
  classifier.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"seed", seed},
          {"mode", to_string(mode)},
          {"freeze", models::to_string(freeze)},
          {"n_way", episodes.n_way},
          {"k_shot", episodes.k_shot},
          {"n_query", episodes.n_query},
          {"episodes_per_epoch", episodes.episodes_per_epoch},
          {"classifier", classifier.to_json()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("mode")) c.mode = parse_train_mode(j.at("mode").get<std::string>());
    if (j.contains("freeze")) c.freeze = models::parse_freeze_mode(j.at("freeze").get<std::string>());
    c.episodes.n_way = j.value("n_way", c.episodes.n_way);
    c.episodes.k_shot = j.value("k_shot", c.episodes.k_shot);
    c.episodes.n_query = j.value("n_query", c.episodes.n_query);
    c.episodes.episodes_per_epoch = j.value("episodes_per_epoch", c.episodes.episodes_per_epoch);
    if (j.contains("classifier")) c.classifier = models::ClassifierConfig::from_json(j.at("classifier"));
  } catch (const nlohmann::json::type_error& e) {
    throw ConfigError("config", fmt::format("config value has the wrong type: {}", e.what()));
  }
  c.validate();
  return c;
}

std::vector<int> TrainSet::labels() const {
  std::vector<int> out;
  out.reserve(clips.size());
  for (const auto* c : clips) out.push_back(c->label_value());
  return out;
}

EpochSnapshot take_snapshot(models::Classifier& model, double train_loss, std::optional<nn::Tensor> prototypes) {
  EpochSnapshot s;
  for (const nn::Parameter* p : model.parameters()) s.values.push_back(p->value);
  s.prototypes = std::move(prototypes);
  s.train_loss = train_loss;
  return s;
}

void restore_snapshot(models::Classifier& model, const EpochSnapshot& snap) {
  const nn::ParameterList params = model.parameters();
  if (params.size() != snap.values.size()) throw Error("snapshot does not match the model's parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap.values[i];
}

namespace {

nn::Tensor items_features(const models::Classifier& model, const TrainSet& set, std::span<const std::size_t> idx,
                          models::BackboneCache* backbone_cache) {
  std::vector<const nn::Tensor*> items;
  if (set.has_features()) {
    for (std::size_t i : idx) items.push_back(set.features[i]);
    if (backbone_cache) backbone_cache->acts.clear();
    return nn::stack(items);
  }
  for (std::size_t i : idx) items.push_back(&set.clips[i]->frames);
  return model.features(nn::stack(items), backbone_cache);
}

}  // namespace

nn::Tensor forward_items(const models::Classifier& model, const TrainSet& set, std::span<const std::size_t> idx,
                         models::ClassifierCache* cache) {
  nn::Tensor feats = items_features(model, set, idx, cache ? &cache->backbone : nullptr);
  nn::Tensor logits = model.head_forward(feats, cache);
  if (cache) cache->features = std::move(feats);
  return logits;
}

nn::Tensor embed_all(const models::Classifier& model, const TrainSet& set, std::span<const std::size_t> idx) {
  const std::size_t dim = model.config().temporal_channels;
  nn::Tensor out({idx.size(), dim});
  for (std::size_t start = 0; start < idx.size(); start += kChunk) {
    const auto part = idx.subspan(start, std::min(kChunk, idx.size() - start));
    models::ClassifierCache cache;
    model.head_forward(items_features(model, set, part, nullptr), &cache);
    std::copy(cache.embedding.values().begin(), cache.embedding.values().end(), out.data() + start * dim);
  }
  return out;
}

nn::Tensor clip_features(const models::Classifier& model, const data::Clip& clip) {
  const auto& s = clip.frames.shape();
  nn::Tensor f = model.features(clip.frames.reshaped({1, s[0], s[1], s[2]}));
  f.reshape({f.dim(1), f.dim(2), f.dim(3)});
  return f;
}

double predict_probability(const models::Classifier& model, const std::optional<nn::Tensor>& prototypes,
                           const data::Clip& clip, const nn::Tensor* features) {
  models::ClassifierCache cache;
  if (features) {
    model.head_forward(features->reshaped({1, features->dim(0), features->dim(1), features->dim(2)}), &cache);
  } else {
    const auto& s = clip.frames.shape();
    model.head_forward(model.features(clip.frames.reshaped({1, s[0], s[1], s[2]})), &cache);
  }
  if (prototypes) return fsl_predict(cache.embedding.values(), *prototypes);
  return nn::sigmoid(cache.logits[0]);
}

}  // namespace ccc::train
