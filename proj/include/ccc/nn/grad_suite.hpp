#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccc/nn/grad_check.hpp"

namespace ccc::nn {

struct LayerGradResult {
  std::string layer;
  GradCheckReport report;
};

/// Finite-difference checks of every layer and loss on small random inputs:
/// conv2d for kernel {1,3} × dilation {1,4}, dense, relu, sigmoid,
/// global_avg_pool, MSE and BCE. Layer outputs are reduced to a scalar by a
/// fixed random projection.
std::vector<LayerGradResult> layer_grad_suite(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace ccc::nn
