#pragma once

#include "ccc/nn/tensor.hpp"

namespace ccc::nn {

struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// Mean squared error; grad = 2(pred − target)/count.
LossResult loss_mse(const Tensor& pred, const Tensor& target);

/// Mean binary cross-entropy evaluated from logits. Targets must be 0 or 1.
/// grad = (sigmoid(logit) − target)/count.
LossResult loss_bce_logits(const Tensor& logits, const Tensor& targets);

}  // namespace ccc::nn
