#pragma once

#include "ccc/models/backbone.hpp"
#include "ccc/nn/checkpoint.hpp"

namespace ccc::models {

struct SegmenterCache {
  BackboneCache backbone;
  nn::Tensor features;
};

/// Backbone followed by a 1×1 conv to a single linear output channel.
class Segmenter {
 public:
  explicit Segmenter(BackboneConfig cfg = {});

  void init(nn::Rng& rng);
  /// [N,1,H,W] (or [1,H,W]) -> [N,1,H,W], unclamped.
  nn::Tensor forward(const nn::Tensor& input, SegmenterCache* cache = nullptr) const;
  void backward(const SegmenterCache& cache, const nn::Tensor& grad_output);
  /// Forward pass clamped to [0,1], as consumed at inference.
  nn::Tensor predict(const nn::Tensor& input) const;

  Backbone& backbone() { return backbone_; }
  const Backbone& backbone() const { return backbone_; }
  nn::ParameterList parameters();

  /// Role "segmentation". Records a fixed fixture input and this model's
  /// output on it so loaders can verify the weights reproduce.
  nn::ModelCheckpoint to_checkpoint(nlohmann::json provenance) const;
  static Segmenter from_checkpoint(const nn::ModelCheckpoint& ckpt);

 private:
  Backbone backbone_;
  nn::Parameter head_w_;
  nn::Parameter head_b_;
};

/// Mean of the prediction clamped to [0,1].
double vesselness_score(const nn::Tensor& seg_prediction);

/// Deterministic [1,1,16,16] pattern stored in checkpoints as "fixture/input".
nn::Tensor fixture_input();

/// Largest absolute difference between `seg` applied to the stored fixture
/// input and the stored fixture output.
double fixture_deviation(const Segmenter& seg, const nn::ModelCheckpoint& ckpt);

}  // namespace ccc::models
