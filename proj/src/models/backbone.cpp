#include "ccc/models/backbone.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::models {

std::size_t BackboneConfig::receptive_field() const {
  std::size_t rf = 1;
  for (int d : dilations) rf += (kernel - 1) * static_cast<std::size_t>(d);
  return rf;
}

void BackboneConfig::validate() const {
  if (in_channels < 1) throw ConfigError("in_channels", "in_channels must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel", fmt::format("kernel must be odd and >= 1, got {}", kernel));
  if (channels.empty()) throw ConfigError("channels", "backbone needs at least one layer");
  if (dilations.size() != channels.size()) {
    throw ConfigError("dilations", fmt::format("{} dilations for {} layers", dilations.size(), channels.size()));
  }
  for (std::size_t c : channels) {
    if (c < 1) throw ConfigError("channels", "channel counts must be >= 1");
  }
  for (int d : dilations) {
    if (d < 1) throw ConfigError("dilations", "dilations must be >= 1");
  }
}

nlohmann::json BackboneConfig::to_json() const {
  return {{"in_channels", in_channels}, {"kernel", kernel}, {"channels", channels}, {"dilations", dilations}};
}

BackboneConfig BackboneConfig::from_json(const nlohmann::json& j) {
  BackboneConfig c;
  c.in_channels = j.value("in_channels", c.in_channels);
  c.kernel = j.value("kernel", c.kernel);
  if (j.contains("channels")) c.channels = j.at("channels").get<std::vector<std::size_t>>();
  if (j.contains("dilations")) c.dilations = j.at("dilations").get<std::vector<int>>();
  c.validate();
  return c;
}

void kaiming_normal(nn::Tensor& weights, nn::Rng& rng) {
  const double fan_in = static_cast<double>(weights.size() / weights.dim(0));
  const double std = std::sqrt(2.0 / fan_in);
  for (auto& v : weights.values()) v = static_cast<float>(rng.normal(0.0, std));
}

Backbone::Backbone(BackboneConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build();
}

Backbone::Backbone(const Backbone& other) = default;
Backbone& Backbone::operator=(const Backbone& other) = default;

void Backbone::build() {
  weights_.clear();
  biases_.clear();
  std::size_t cin = cfg_.in_channels;
  for (std::size_t i = 0; i < cfg_.layers(); ++i) {
    const std::size_t cout = cfg_.channels[i];
    weights_.emplace_back(fmt::format("backbone.conv{}.weight", i), nn::Tensor({cout, cin, cfg_.kernel, cfg_.kernel}));
    biases_.emplace_back(fmt::format("backbone.conv{}.bias", i), nn::Tensor({cout}));
    cin = cout;
  }
}

void Backbone::init(nn::Rng& rng) {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    kaiming_normal(weights_[i].value, rng);
    biases_[i].value.fill(0.0f);
    weights_[i].reset_moments();
    biases_[i].reset_moments();
  }
}

nn::Conv2dSpec Backbone::spec(std::size_t layer) const {
  const int d = cfg_.dilations[layer];
  return {1, d * static_cast<int>(cfg_.kernel / 2), d};
}

nn::Tensor Backbone::forward(const nn::Tensor& input, BackboneCache* cache) const {
  nn::Tensor x = input.rank() == 3 ? input.reshaped({1, input.dim(0), input.dim(1), input.dim(2)}) : input;
  if (x.rank() != 4) throw ShapeError("rank", fmt::format("backbone expects [N,C,H,W], got {}", nn::shape_string(input.shape())));
  if (x.dim(1) != cfg_.in_channels) {
    throw ShapeError("channels", fmt::format("backbone expects {} input channels, got {}", cfg_.in_channels, x.dim(1)));
  }
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(x);
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    x = nn::conv2d(x, weights_[i].value, biases_[i].value, spec(i));
    nn::relu_inplace(x);
    if (cache) cache->acts.push_back(x);
  }
  return x;
}

nn::Tensor Backbone::backward(const BackboneCache& cache, nn::Tensor grad, bool want_input_grad) {
  if (cache.acts.size() != weights_.size() + 1) throw Error("backbone backward called without a matching forward cache");
  for (std::size_t i = weights_.size(); i-- > 0;) {
    nn::relu_backward_inplace(cache.acts[i + 1], grad);
    const bool need_input = i > 0 || want_input_grad;
    nn::Tensor grad_in;
    nn::conv2d_backward(cache.acts[i], weights_[i].value, spec(i), grad, need_input ? &grad_in : nullptr,
                        &weights_[i].grad, &biases_[i].grad);
    grad = std::move(grad_in);
  }
  return grad;
}

nn::ParameterList Backbone::parameters() {
  nn::ParameterList out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<const nn::Parameter*> Backbone::parameters() const {
  std::vector<const nn::Parameter*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

}  // namespace ccc::models
