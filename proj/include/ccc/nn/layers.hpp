#pragma once

#include "ccc/nn/tensor.hpp"

namespace ccc::nn {

struct Conv2dSpec {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
};

/// Output extent along one spatial axis; throws ShapeError when non-positive.
std::size_t conv2d_output_extent(std::size_t input, std::size_t kernel, const Conv2dSpec& spec,
                                 const char* axis);

/// Cross-correlation of input [N,Cin,H,W] with weights [Cout,Cin,k,k] plus bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const Conv2dSpec& spec);

/// Backward pass of conv2d. `grad_weights` and `grad_bias` are accumulated into
/// (+=); `grad_input` is overwritten. Any of the three may be null to skip it.
void conv2d_backward(const Tensor& input, const Tensor& weights, const Conv2dSpec& spec,
                     const Tensor& grad_output, Tensor* grad_input, Tensor* grad_weights,
                     Tensor* grad_bias);

/// input [N,Din] · weightsᵀ [Dout,Din] + bias [Dout] -> [N,Dout].
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);
void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output,
                    Tensor* grad_input, Tensor* grad_weights, Tensor* grad_bias);

enum class Activation { relu, sigmoid };

float sigmoid(float x) noexcept;
Tensor activation(const Tensor& input, Activation kind);
/// Needs the forward input (relu) or output (sigmoid); both are passed so the
/// caller does not have to know which.
Tensor activation_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                           Activation kind);
void relu_inplace(Tensor& t) noexcept;
/// grad *= (activation > 0), in place.
void relu_backward_inplace(const Tensor& activation_output, Tensor& grad) noexcept;

/// [N,C,H,W] -> [N,C] spatial mean.
Tensor global_avg_pool(const Tensor& input);
Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_output);

}  // namespace ccc::nn
