#pragma once

#include <cstddef>

#include "ccc/nn/tensor.hpp"

namespace ccc::eval {

struct PixelCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  PixelCounts& operator+=(const PixelCounts& o);
};

struct DiceResult {
  double dice = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  /// Set when the binarized ground truth is empty; dice is then 1.0 if the
  /// prediction is empty too and 0.0 otherwise, and sensitivity follows suit.
  bool empty_ground_truth = false;
  PixelCounts counts;
};

/// Both maps binarized with value >= threshold -> vessel.
PixelCounts pixel_counts(const nn::Tensor& pred, const nn::Tensor& gt, double threshold = 0.5);
DiceResult dice_from_counts(const PixelCounts& counts);
DiceResult dice_pixel_metrics(const nn::Tensor& pred, const nn::Tensor& gt, double threshold = 0.5);

}  // namespace ccc::eval
