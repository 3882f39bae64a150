#pragma once

#include <string>
#include <vector>

#include "ccc/nn/tensor.hpp"

namespace ccc::nn {

/// A trainable tensor together with its gradient and Adam moment buffers.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor initial);

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  bool trainable = true;

  void zero_grad();
  /// Clears the optimizer moments; used when weights are re-initialized or loaded.
  void reset_moments();
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);

}  // namespace ccc::nn
