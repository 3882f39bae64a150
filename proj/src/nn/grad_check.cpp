#include "ccc/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::nn {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

double GradCheckReport::worst_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

namespace {

double checked(double value, const char* where) {
  if (!std::isfinite(value)) throw Error(fmt::format("grad_check: non-finite loss ({})", where));
  return value;
}

}  // namespace

GradCheckReport grad_check(const LossClosure& loss, const ParameterList& params, const GradCheckOptions& options) {
  zero_grads(params);
  checked(loss(true), "analytic pass");
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const Tensor& a = analytic[pi];
    GradCheckEntry entry;
    entry.name = p.name;
    entry.count = p.value.size();
    double max_a = 0.0, max_n = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const float original = p.value[i];
      p.value[i] = original + static_cast<float>(options.step);
      const double up_at = p.value[i];
      const double up = checked(loss(false), "perturbed +");
      p.value[i] = original - static_cast<float>(options.step);
      const double down_at = p.value[i];
      const double down = checked(loss(false), "perturbed -");
      p.value[i] = original;
      // Divide by the step actually representable in float32.
      const double numeric = (up - down) / (up_at - down_at);
      const double analytic_i = a[i];
      entry.max_abs_error = std::max(entry.max_abs_error, std::abs(analytic_i - numeric));
      max_a = std::max(max_a, std::abs(analytic_i));
      max_n = std::max(max_n, std::abs(numeric));
    }
    entry.max_rel_error = entry.max_abs_error / std::max({max_a, max_n, options.floor});
    entry.passed = entry.max_rel_error <= options.tolerance;
    report.entries.push_back(std::move(entry));
    p.grad = a;
  }
  return report;
}

}  // namespace ccc::nn
