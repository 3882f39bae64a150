#include "ccc/models/segmenter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::models {

Segmenter::Segmenter(BackboneConfig cfg)
    : backbone_(std::move(cfg)),
      head_w_("seg_head.weight", nn::Tensor({1, backbone_.config().out_channels(), 1, 1})),
      head_b_("seg_head.bias", nn::Tensor({1})) {}

void Segmenter::init(nn::Rng& rng) {
  backbone_.init(rng);
  kaiming_normal(head_w_.value, rng);
  head_b_.value.fill(0.0f);
  head_w_.reset_moments();
  head_b_.reset_moments();
}

nn::Tensor Segmenter::forward(const nn::Tensor& input, SegmenterCache* cache) const {
  nn::Tensor features = backbone_.forward(input, cache ? &cache->backbone : nullptr);
  nn::Tensor out = nn::conv2d(features, head_w_.value, head_b_.value, {});
  if (cache) cache->features = std::move(features);
  return out;
}

void Segmenter::backward(const SegmenterCache& cache, const nn::Tensor& grad_output) {
  nn::Tensor grad_features;
  const nn::ParameterList bb = backbone_.parameters();
  const bool backbone_trainable = std::any_of(bb.begin(), bb.end(), [](const nn::Parameter* p) { return p->trainable; });
  nn::conv2d_backward(cache.features, head_w_.value, {}, grad_output, backbone_trainable ? &grad_features : nullptr,
                      &head_w_.grad, &head_b_.grad);
  if (backbone_trainable) backbone_.backward(cache.backbone, std::move(grad_features));
}

nn::Tensor Segmenter::predict(const nn::Tensor& input) const {
  nn::Tensor out = forward(input);
  for (auto& v : out.values()) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

nn::ParameterList Segmenter::parameters() {
  nn::ParameterList out = backbone_.parameters();
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

nn::Tensor fixture_input() {
  nn::Tensor x({1, 1, 16, 16});
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t c = 0; c < 16; ++c) {
      x.at(0, 0, y, c) = static_cast<float>(0.5 + 0.4 * std::sin(0.7 * static_cast<double>(y)) *
                                                      std::cos(0.45 * static_cast<double>(c)));
    }
  }
  return x;
}

nn::ModelCheckpoint Segmenter::to_checkpoint(nlohmann::json provenance) const {
  nn::ModelCheckpoint ckpt;
  ckpt.role = "segmentation";
  ckpt.architecture = {{"backbone", backbone_.config().to_json()}, {"head", "conv1x1-linear"}};
  ckpt.provenance = std::move(provenance);
  for (const nn::Parameter* p : backbone_.parameters()) ckpt.put(p->name, p->value);
  ckpt.put(head_w_.name, head_w_.value);
  ckpt.put(head_b_.name, head_b_.value);
  nn::Tensor input = fixture_input();
  ckpt.put("fixture/output", forward(input));
  ckpt.put("fixture/input", std::move(input));
  return ckpt;
}

Segmenter Segmenter::from_checkpoint(const nn::ModelCheckpoint& ckpt) {
  if (ckpt.role != "segmentation") {
    throw ConfigError("role", fmt::format("expected a segmentation checkpoint, got role '{}'", ckpt.role));
  }
  Segmenter seg(BackboneConfig::from_json(ckpt.architecture.at("backbone")));
  for (nn::Parameter* p : seg.parameters()) {
    const nn::Tensor& t = ckpt.get(p->name);
    if (t.shape() != p->value.shape()) {
      throw ConfigError(p->name, fmt::format("checkpoint tensor {} has shape {}, model expects {}", p->name,
                                             nn::shape_string(t.shape()), nn::shape_string(p->value.shape())));
    }
    p->value = t;
    p->reset_moments();
  }
  return seg;
}

double vesselness_score(const nn::Tensor& seg_prediction) {
  double sum = 0.0;
  for (float v : seg_prediction.values()) sum += std::clamp(v, 0.0f, 1.0f);
  return seg_prediction.size() ? sum / static_cast<double>(seg_prediction.size()) : 0.0;
}

double fixture_deviation(const Segmenter& seg, const nn::ModelCheckpoint& ckpt) {
  const nn::Tensor* in = ckpt.find("fixture/input");
  const nn::Tensor* expected = ckpt.find("fixture/output");
  if (!in || !expected) throw ValidationError(std::nullopt, "fixture", "checkpoint carries no fixture tensors");
  const nn::Tensor got = seg.forward(*in);
  if (got.shape() != expected->shape()) throw ShapeError("fixture", "fixture output shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(double(got[i]) - double((*expected)[i])));
  return worst;
}

}  // namespace ccc::models
