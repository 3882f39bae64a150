#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/nn/layers.hpp"
#include "ccc/nn/parameter.hpp"
#include "ccc/nn/rng.hpp"

namespace ccc::models {

struct BackboneConfig {
  std::size_t in_channels = 1;
  std::size_t kernel = 3;
  std::vector<std::size_t> channels = {16, 16, 16, 16, 16, 16};
  std::vector<int> dilations = {1, 2, 4, 8, 16, 32};

  std::size_t layers() const { return channels.size(); }
  std::size_t out_channels() const { return channels.back(); }
  /// 1 + (k−1)·Σ dilation for stride-1 stacks.
  std::size_t receptive_field() const;
  void validate() const;
  nlohmann::json to_json() const;
  static BackboneConfig from_json(const nlohmann::json& j);
};

/// Per-layer activations kept for the backward pass: acts[0] is the input,
/// acts[i] the ReLU output of layer i.
struct BackboneCache {
  std::vector<nn::Tensor> acts;
};

/// Six dilated 3×3 conv + ReLU layers at stride 1; spatial size is preserved.
class Backbone {
 public:
  explicit Backbone(BackboneConfig cfg = {});
  Backbone(const Backbone& other);
  Backbone& operator=(const Backbone& other);

  const BackboneConfig& config() const { return cfg_; }
  void init(nn::Rng& rng);

  /// [N,Cin,H,W] -> [N,C,H,W]. A rank-3 [Cin,H,W] input is treated as N=1.
  nn::Tensor forward(const nn::Tensor& input, BackboneCache* cache = nullptr) const;
  /// Accumulates parameter gradients; returns the input gradient when requested.
  nn::Tensor backward(const BackboneCache& cache, nn::Tensor grad_output, bool want_input_grad = false);

  nn::ParameterList parameters();
  std::vector<const nn::Parameter*> parameters() const;
  nn::Conv2dSpec spec(std::size_t layer) const;

 private:
  void build();

  BackboneConfig cfg_;
  std::vector<nn::Parameter> weights_;
  std::vector<nn::Parameter> biases_;
};

/// Kaiming-normal fill with std sqrt(2 / fan_in); fan_in is the product of all
/// axes but the first.
void kaiming_normal(nn::Tensor& weights, nn::Rng& rng);

}  // namespace ccc::models
