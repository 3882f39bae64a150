#pragma once

#include <optional>
#include <string>

#include "ccc/models/backbone.hpp"
#include "ccc/nn/checkpoint.hpp"

namespace ccc::models {

enum class FreezeMode { none, pretrained_unfrozen, pretrained_frozen };

/// Accepts "none", "unfrozen"/"pretrained_unfrozen", "frozen"/"pretrained_frozen".
FreezeMode parse_freeze_mode(const std::string& text);
std::string to_string(FreezeMode mode);
/// Short form used on the command line and in report tables.
std::string short_name(FreezeMode mode);

struct ClassifierConfig {
  std::size_t temporal_channels = 32;
  double decision_threshold = 0.5;
  std::size_t frames = 11;
  BackboneConfig backbone;

  void validate() const;
  nlohmann::json to_json() const;
  static ClassifierConfig from_json(const nlohmann::json& j);
};

struct ClassifierCache {
  BackboneCache backbone;  // empty when the backbone was not run or not needed
  nn::Tensor features;     // [B, frames·C, H, W]
  nn::Tensor temporal;     // [B, T, H, W] after ReLU
  nn::Tensor embedding;    // [B, T]
  nn::Tensor logits;       // [B, 1]
};

struct ClassifyResult {
  double probability = 0.5;
  double logit = 0.0;
  nn::Tensor embedding;
  bool positive = false;
};

/// Per-frame backbone, channel concatenation, 1×1 temporal conv + ReLU,
/// global average pool (the embedding), and an FC layer to one logit.
class Classifier {
 public:
  explicit Classifier(ClassifierConfig cfg = {});

  const ClassifierConfig& config() const { return cfg_; }
  void init(nn::Rng& rng);
  void init_head(nn::Rng& rng);

  /// [B, frames, H, W] -> [B, frames·C, H, W] concatenated per-frame features.
  /// Keeps the backbone cache when `cache` is given.
  nn::Tensor features(const nn::Tensor& clips, BackboneCache* cache = nullptr) const;
  /// Head on precomputed features; fills the head fields of `cache` (the
  /// caller sets `cache->features`).
  nn::Tensor head_forward(const nn::Tensor& features, ClassifierCache* cache = nullptr) const;
  /// Full forward on [B, frames, H, W] clips; returns logits [B,1].
  nn::Tensor forward(const nn::Tensor& clips, ClassifierCache* cache = nullptr) const;
  /// Accumulates gradients from d(loss)/d(logits) and/or d(loss)/d(embedding).
  /// Backpropagates into the backbone only when it has trainable parameters
  /// and the cache holds its activations.
  void backward(const ClassifierCache& cache, const nn::Tensor* grad_logits, const nn::Tensor* grad_embedding);

  /// Single clip [frames,1,H,W] or [frames,H,W].
  ClassifyResult classify(const nn::Tensor& clip) const;

  Backbone& backbone() { return backbone_; }
  const Backbone& backbone() const { return backbone_; }
  nn::ParameterList parameters();
  nn::ParameterList head_parameters();
  bool backbone_trainable();
  bool pretrained_loaded() const { return pretrained_; }

  nn::ModelCheckpoint to_checkpoint(nlohmann::json provenance, const std::vector<nn::NamedTensor>& extras = {}) const;
  static Classifier from_checkpoint(const nn::ModelCheckpoint& ckpt);

 private:
  friend void load_pretrained(Classifier& model, const nn::ModelCheckpoint& ckpt, nn::Rng& rng);

  ClassifierConfig cfg_;
  Backbone backbone_;
  nn::Parameter temporal_w_;
  nn::Parameter temporal_b_;
  nn::Parameter fc_w_;
  nn::Parameter fc_b_;
  bool pretrained_ = false;
};

/// Copies backbone weights from a checkpoint (any role carrying "backbone.*"
/// tensors) and re-initializes the head. Throws ConfigError naming the first
/// differing backbone field.
void load_pretrained(Classifier& model, const nn::ModelCheckpoint& ckpt, nn::Rng& rng);

/// Sets trainable flags: frozen mode trains only the temporal conv and FC.
void apply_freeze(Classifier& model, FreezeMode mode);

}  // namespace ccc::models
