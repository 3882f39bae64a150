#pragma once

#include <cstddef>
#include <span>

namespace ccc::eval {

struct Prediction {
  double probability = 0.0;
  int label = 0;  // 1 = CCC present
};

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  ConfusionMatrix counts;

  bool operator==(const MetricsReport&) const = default;
};

/// Positive iff probability > threshold (0.5 itself is negative). Throws on an
/// empty list or a label outside {0,1}.
ConfusionMatrix confusion(std::span<const Prediction> preds, double threshold = 0.5);

/// Throws UndefinedMetricError when the total, P or N is zero.
MetricsReport metrics(const ConfusionMatrix& cm);

/// |accuracy·(P+N) − (sensitivity·P + specificity·N)|.
double consistency_residual(const MetricsReport& report);

}  // namespace ccc::eval
