#include "ccc/nn/loss.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"
#include "ccc/nn/layers.hpp"

namespace ccc::nn {

LossResult loss_mse(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("target", fmt::format("mse: pred {} vs target {}", shape_string(pred.shape()),
                                           shape_string(target.shape())));
  }
  LossResult r{0.0, Tensor::zeros_like(pred)};
  const double n = static_cast<double>(pred.size());
  const float scale = static_cast<float>(2.0 / n);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const float d = pred[i] - target[i];
    acc += static_cast<double>(d) * d;
    r.grad[i] = scale * d;
  }
  r.value = acc / n;
  return r;
}

LossResult loss_bce_logits(const Tensor& logits, const Tensor& targets) {
  if (logits.size() != targets.size()) {
    throw ShapeError("target", fmt::format("bce: logits {} vs targets {}", shape_string(logits.shape()),
                                           shape_string(targets.shape())));
  }
  LossResult r{0.0, Tensor::zeros_like(logits)};
  const double n = static_cast<double>(logits.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const float y = targets[i];
    if (y != 0.0f && y != 1.0f) {
      throw ValidationError(i, "target", fmt::format("bce target {} at index {} is not 0 or 1", y, i));
    }
    const double z = logits[i];
    // max(z,0) − z·y + log(1 + e^−|z|)
    acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    r.grad[i] = static_cast<float>((sigmoid(logits[i]) - y) / n);
  }
  r.value = acc / n;
  return r;
}

}  // namespace ccc::nn
