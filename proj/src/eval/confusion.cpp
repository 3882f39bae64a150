#include "ccc/eval/confusion.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::eval {

ConfusionMatrix confusion(std::span<const Prediction> preds, double threshold) {
  if (preds.empty()) throw ValidationError(std::nullopt, "predictions", "confusion matrix of an empty prediction list");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    if (p.label != 0 && p.label != 1) {
      throw ValidationError(i, "label", fmt::format("prediction {}: label must be 0 or 1, got {}", i, p.label));
    }
    const bool positive = p.probability > threshold;
    if (p.label == 1) {
      positive ? ++cm.tp : ++cm.fn;
    } else {
      positive ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw UndefinedMetricError("accuracy", "accuracy undefined: no samples");
  if (cm.positives() == 0) throw UndefinedMetricError("sensitivity", "sensitivity undefined: no positive samples");
  if (cm.negatives() == 0) throw UndefinedMetricError("specificity", "specificity undefined: no negative samples");
  MetricsReport r;
  r.counts = cm;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
  r.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
  return r;
}

double consistency_residual(const MetricsReport& r) {
  const auto p = static_cast<double>(r.counts.positives());
  const auto n = static_cast<double>(r.counts.negatives());
  return std::abs(r.accuracy * (p + n) - (r.sensitivity * p + r.specificity * n));
}

}  // namespace ccc::eval
