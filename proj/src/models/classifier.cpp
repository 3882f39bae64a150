#include "ccc/models/classifier.hpp"

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::models {

FreezeMode parse_freeze_mode(const std::string& text) {
  if (text == "none") return FreezeMode::none;
  if (text == "unfrozen" || text == "pretrained_unfrozen") return FreezeMode::pretrained_unfrozen;
  if (text == "frozen" || text == "pretrained_frozen") return FreezeMode::pretrained_frozen;
  throw ConfigError("freeze", fmt::format("unknown freeze mode '{}' (expected none, unfrozen or frozen)", text));
}

std::string to_string(FreezeMode mode) {
  switch (mode) {
    case FreezeMode::none: return "none";
    case FreezeMode::pretrained_unfrozen: return "pretrained_unfrozen";
    case FreezeMode::pretrained_frozen: return "pretrained_frozen";
  }
  return "none";
}

std::string short_name(FreezeMode mode) {
  switch (mode) {
    case FreezeMode::none: return "none";
    case FreezeMode::pretrained_unfrozen: return "unfrozen";
    case FreezeMode::pretrained_frozen: return "frozen";
  }
  return "none";
}

void ClassifierConfig::validate() const {
  if (temporal_channels < 1) throw ConfigError("temporal_channels", "temporal_channels must be >= 1");
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
    throw ConfigError("decision_threshold", fmt::format("decision_threshold must be in (0,1), got {}", decision_threshold));
  }
  if (frames < 1) throw ConfigError("frames", "frames must be >= 1");
  backbone.validate();
}

nlohmann::json ClassifierConfig::to_json() const {
  return {{"temporal_channels", temporal_channels},
          {"decision_threshold", decision_threshold},
          {"frames", frames},
          {"backbone", backbone.to_json()}};
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.temporal_channels = j.value("temporal_channels", c.temporal_channels);
  c.decision_threshold = j.value("decision_threshold", c.decision_threshold);
  c.frames = j.value("frames", c.frames);
  if (j.contains("backbone")) c.backbone = BackboneConfig::from_json(j.at("backbone"));
  c.validate();
  return c;
}

Classifier::Classifier(ClassifierConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      backbone_(cfg_.backbone),
      temporal_w_("temporal.weight",
                  nn::Tensor({cfg_.temporal_channels, cfg_.frames * cfg_.backbone.out_channels(), 1, 1})),
      temporal_b_("temporal.bias", nn::Tensor({cfg_.temporal_channels})),
      fc_w_("fc.weight", nn::Tensor({1, cfg_.temporal_channels})),
      fc_b_("fc.bias", nn::Tensor({1})) {}

void Classifier::init(nn::Rng& rng) {
  backbone_.init(rng);
  init_head(rng);
  pretrained_ = false;
}

void Classifier::init_head(nn::Rng& rng) {
  kaiming_normal(temporal_w_.value, rng);
  temporal_b_.value.fill(0.0f);
  kaiming_normal(fc_w_.value, rng);
  fc_b_.value.fill(0.0f);
  for (nn::Parameter* p : head_parameters()) p->reset_moments();
}

nn::Tensor Classifier::features(const nn::Tensor& clips, BackboneCache* cache) const {
  if (clips.rank() != 4) {
    throw ShapeError("rank", fmt::format("clips must be [B,frames,H,W], got {}", nn::shape_string(clips.shape())));
  }
  if (clips.dim(1) != cfg_.frames) {
    throw ShapeError("frames", fmt::format("classifier expects {} frames per clip, got {}", cfg_.frames, clips.dim(1)));
  }
  const std::size_t b = clips.dim(0), h = clips.dim(2), w = clips.dim(3);
  nn::Tensor per_frame = backbone_.forward(clips.reshaped({b * cfg_.frames, 1, h, w}), cache);
  // [B·F, C, H, W] and [B, F·C, H, W] share one memory layout.
  per_frame.reshape({b, cfg_.frames * cfg_.backbone.out_channels(), h, w});
  return per_frame;
}

nn::Tensor Classifier::head_forward(const nn::Tensor& feats, ClassifierCache* cache) const {
  nn::Tensor temporal = nn::conv2d(feats, temporal_w_.value, temporal_b_.value, {});
  nn::relu_inplace(temporal);
  nn::Tensor embedding = nn::global_avg_pool(temporal);
  nn::Tensor logits = nn::dense(embedding, fc_w_.value, fc_b_.value);
  if (cache) {
    cache->temporal = std::move(temporal);
    cache->embedding = std::move(embedding);
    cache->logits = logits;
  }
  return logits;
}

nn::Tensor Classifier::forward(const nn::Tensor& clips, ClassifierCache* cache) const {
  nn::Tensor feats = features(clips, cache ? &cache->backbone : nullptr);
  nn::Tensor logits = head_forward(feats, cache);
  if (cache) cache->features = std::move(feats);
  return logits;
}

void Classifier::backward(const ClassifierCache& cache, const nn::Tensor* grad_logits, const nn::Tensor* grad_embedding) {
  nn::Tensor grad_emb(cache.embedding.shape());
  if (grad_logits) {
    nn::dense_backward(cache.embedding, fc_w_.value, *grad_logits, &grad_emb, &fc_w_.grad, &fc_b_.grad);
  }
  if (grad_embedding) nn::add_inplace(grad_emb, *grad_embedding);
  nn::Tensor grad_temporal = nn::global_avg_pool_backward(cache.temporal.shape(), grad_emb);
  nn::relu_backward_inplace(cache.temporal, grad_temporal);
  const bool into_backbone = backbone_trainable() && !cache.backbone.acts.empty();
  nn::Tensor grad_feats;
  nn::conv2d_backward(cache.features, temporal_w_.value, {}, grad_temporal, into_backbone ? &grad_feats : nullptr,
                      &temporal_w_.grad, &temporal_b_.grad);
  if (into_backbone) {
    const auto& s = cache.features.shape();
    grad_feats.reshape({s[0] * cfg_.frames, cfg_.backbone.out_channels(), s[2], s[3]});
    backbone_.backward(cache.backbone, std::move(grad_feats));
  }
}

ClassifyResult Classifier::classify(const nn::Tensor& clip) const {
  nn::Tensor x;
  if (clip.rank() == 4 && clip.dim(1) == 1) {
    x = clip.reshaped({1, clip.dim(0), clip.dim(2), clip.dim(3)});
  } else if (clip.rank() == 3) {
    x = clip.reshaped({1, clip.dim(0), clip.dim(1), clip.dim(2)});
  } else {
    throw ShapeError("rank", fmt::format("clip must be [frames,1,H,W] or [frames,H,W], got {}", nn::shape_string(clip.shape())));
  }
  ClassifierCache cache;
  head_forward(features(x), &cache);
  ClassifyResult r;
  r.logit = cache.logits[0];
  r.probability = nn::sigmoid(cache.logits[0]);
  r.positive = r.probability > cfg_.decision_threshold;
  r.embedding = cache.embedding.reshaped({cfg_.temporal_channels});
  return r;
}

nn::ParameterList Classifier::parameters() {
  nn::ParameterList out = backbone_.parameters();
  for (nn::Parameter* p : head_parameters()) out.push_back(p);
  return out;
}

nn::ParameterList Classifier::head_parameters() { return {&temporal_w_, &temporal_b_, &fc_w_, &fc_b_}; }

bool Classifier::backbone_trainable() {
  for (nn::Parameter* p : backbone_.parameters()) {
    if (p->trainable) return true;
  }
  return false;
}

nn::ModelCheckpoint Classifier::to_checkpoint(nlohmann::json provenance, const std::vector<nn::NamedTensor>& extras) const {
  nn::ModelCheckpoint ckpt;
  ckpt.role = "classifier";
  ckpt.architecture = cfg_.to_json();
  ckpt.provenance = std::move(provenance);
  for (const nn::Parameter* p : backbone_.parameters()) ckpt.put(p->name, p->value);
  for (const nn::Parameter* p : {&temporal_w_, &temporal_b_, &fc_w_, &fc_b_}) ckpt.put(p->name, p->value);
  for (const auto& e : extras) ckpt.put(e.name, e.value);
  return ckpt;
}

Classifier Classifier::from_checkpoint(const nn::ModelCheckpoint& ckpt) {
  if (ckpt.role != "classifier") {
    throw ConfigError("role", fmt::format("expected a classifier checkpoint, got role '{}'", ckpt.role));
  }
  Classifier model(ClassifierConfig::from_json(ckpt.architecture));
  for (nn::Parameter* p : model.parameters()) {
    const nn::Tensor& t = ckpt.get(p->name);
    if (t.shape() != p->value.shape()) {
      throw ConfigError(p->name, fmt::format("checkpoint tensor {} has shape {}, model expects {}", p->name,
                                             nn::shape_string(t.shape()), nn::shape_string(p->value.shape())));
    }
    p->value = t;
  }
  return model;
}

void load_pretrained(Classifier& model, const nn::ModelCheckpoint& ckpt, nn::Rng& rng) {
  const nlohmann::json& arch = ckpt.architecture;
  if (!arch.contains("backbone")) throw ConfigError("backbone", "checkpoint architecture has no backbone section");
  const nlohmann::json theirs = arch.at("backbone");
  const nlohmann::json ours = model.config().backbone.to_json();
  for (const auto& [key, value] : ours.items()) {
    if (!theirs.contains(key)) throw ConfigError(key, fmt::format("checkpoint backbone config lacks '{}'", key));
    if (theirs.at(key) != value) {
      throw ConfigError(key, fmt::format("backbone {} differs: checkpoint {} vs model {}", key, theirs.at(key).dump(), value.dump()));
    }
  }
  for (nn::Parameter* p : model.backbone().parameters()) {
    const nn::Tensor& t = ckpt.get(p->name);
    if (t.shape() != p->value.shape()) {
      throw ConfigError(p->name, fmt::format("checkpoint tensor {} has shape {}, model expects {}", p->name,
                                             nn::shape_string(t.shape()), nn::shape_string(p->value.shape())));
    }
    p->value = t;
    p->reset_moments();
  }
  model.init_head(rng);
  model.pretrained_ = true;
}

void apply_freeze(Classifier& model, FreezeMode mode) {
  if (mode != FreezeMode::none && !model.pretrained_loaded()) {
    throw ConfigError("freeze", fmt::format("freeze mode {} requires a pretrained checkpoint", to_string(mode)));
  }
  const bool backbone_trainable = mode != FreezeMode::pretrained_frozen;
  for (nn::Parameter* p : model.backbone().parameters()) p->trainable = backbone_trainable;
  for (nn::Parameter* p : model.head_parameters()) p->trainable = true;
}

}  // namespace ccc::models
