#include "ccc/eval/dice.hpp"

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::eval {

PixelCounts& PixelCounts::operator+=(const PixelCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

PixelCounts pixel_counts(const nn::Tensor& pred, const nn::Tensor& gt, double threshold) {
  if (pred.shape() != gt.shape()) {
    throw ShapeError("shape", fmt::format("prediction {} vs ground truth {}", nn::shape_string(pred.shape()),
                                          nn::shape_string(gt.shape())));
  }
  PixelCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] >= threshold;
    const bool g = gt[i] >= threshold;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

DiceResult dice_from_counts(const PixelCounts& c) {
  DiceResult r;
  r.counts = c;
  if (c.tp + c.fn == 0) {
    r.empty_ground_truth = true;
    r.dice = c.fp == 0 ? 1.0 : 0.0;
    r.sensitivity = r.dice;
  } else {
    r.dice = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    r.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  r.specificity = c.tn + c.fp == 0 ? 1.0 : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return r;
}

DiceResult dice_pixel_metrics(const nn::Tensor& pred, const nn::Tensor& gt, double threshold) {
  return dice_from_counts(pixel_counts(pred, gt, threshold));
}

}  // namespace ccc::eval
