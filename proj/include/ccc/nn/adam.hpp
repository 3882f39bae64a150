#pragma once

#include <cstdint>

#include "ccc/nn/parameter.hpp"

namespace ccc::nn {

struct OptimConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;

  void validate() const;
};

/// One bias-corrected Adam update over every trainable parameter, then
/// `cfg.step_count` is incremented. Frozen parameters and their moments are
/// left untouched.
void adam_step(const ParameterList& params, OptimConfig& cfg);

}  // namespace ccc::nn
