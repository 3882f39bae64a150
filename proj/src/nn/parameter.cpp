#include "ccc/nn/parameter.hpp"

namespace ccc::nn {

Parameter::Parameter(std::string param_name, Tensor initial)
    : name(std::move(param_name)),
      value(std::move(initial)),
      grad(Tensor::zeros_like(value)),
      adam_m(Tensor::zeros_like(value)),
      adam_v(Tensor::zeros_like(value)) {}

void Parameter::zero_grad() { grad.fill(0.0f); }

void Parameter::reset_moments() {
  adam_m.fill(0.0f);
  adam_v.fill(0.0f);
}

void zero_grads(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace ccc::nn
