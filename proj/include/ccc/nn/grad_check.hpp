#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ccc/nn/parameter.hpp"

namespace ccc::nn {

struct GradCheckOptions {
  double step = 1e-3;
  double tolerance = 1e-2;
  double floor = 1e-4;
};

struct GradCheckEntry {
  std::string name;
  std::size_t count = 0;
  double max_abs_error = 0.0;
  /// max |analytic − numeric| over the tensor divided by
  /// max(max |analytic|, max |numeric|, floor).
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool passed() const;
  double worst_rel_error() const;
};

/// Evaluates the scalar loss. When `with_grads` is true the closure must also
/// run the backward pass, accumulating into each parameter's `grad`.
using LossClosure = std::function<double(bool with_grads)>;

/// Compares analytic gradients against central differences. Inputs whose
/// gradient should be checked are passed as extra Parameters. Throws ccc::Error
/// if the loss is not finite.
GradCheckReport grad_check(const LossClosure& loss, const ParameterList& params,
                           const GradCheckOptions& options = {});

}  // namespace ccc::nn
