#include "ccc/nn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::nn {

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", fmt::format("learning_rate must be > 0, got {}", learning_rate));
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", fmt::format("beta1 must be in [0,1), got {}", beta1));
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", fmt::format("beta2 must be in [0,1), got {}", beta2));
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", fmt::format("epsilon must be > 0, got {}", epsilon));
}

void adam_step(const ParameterList& params, OptimConfig& cfg) {
  cfg.validate();
  const double t = static_cast<double>(cfg.step_count + 1);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  const auto b1 = static_cast<float>(cfg.beta1);
  const auto b2 = static_cast<float>(cfg.beta2);
  const auto step = static_cast<float>(cfg.learning_rate / correction1);
  const auto inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(correction2));
  const auto eps = static_cast<float>(cfg.epsilon);
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    float* w = p->value.data();
    float* m = p->adam_m.data();
    float* v = p->adam_v.data();
    const float* g = p->grad.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      // lr · m̂ / (√v̂ + ε) with m̂ = m/c1, v̂ = v/c2
      w[i] -= step * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
  ++cfg.step_count;
}

}  // namespace ccc::nn
