#include "ccc/nn/grad_suite.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccc/nn/layers.hpp"
#include "ccc/nn/loss.hpp"
#include "ccc/nn/rng.hpp"

namespace ccc::nn {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.normal(0.0, scale));
  return t;
}

// Values bounded away from 0 so a ±step perturbation never crosses the ReLU kink.
Tensor kink_free(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) {
    const double m = rng.uniform(0.1, 1.0);
    v = static_cast<float>(rng.bernoulli(0.5) ? m : -m);
  }
  return t;
}

double project(const Tensor& out, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += double(out[i]) * double(r[i]);
  return s;
}

LayerGradResult check_conv(std::size_t k, int dilation, Rng& rng, const GradCheckOptions& opt) {
  const Conv2dSpec spec{1, dilation * static_cast<int>(k / 2), dilation};
  Parameter x("input", random_tensor({2, 2, 7, 7}, rng));
  Parameter w("weight", random_tensor({3, 2, k, k}, rng, 0.5));
  Parameter b("bias", random_tensor({3}, rng, 0.5));
  const Shape out_shape = conv2d(x.value, w.value, b.value, spec).shape();
  const Tensor r = random_tensor(out_shape, rng);
  auto loss = [&](bool grads) {
    const Tensor y = conv2d(x.value, w.value, b.value, spec);
    if (grads) {
      Tensor gx;
      conv2d_backward(x.value, w.value, spec, r, &gx, &w.grad, &b.grad);
      add_inplace(x.grad, gx);
    }
    return project(y, r);
  };
  return {fmt::format("conv2d k{} d{}", k, dilation), grad_check(loss, {&x, &w, &b}, opt)};
}

LayerGradResult check_dense(Rng& rng, const GradCheckOptions& opt) {
  Parameter x("input", random_tensor({3, 5}, rng));
  Parameter w("weight", random_tensor({4, 5}, rng, 0.5));
  Parameter b("bias", random_tensor({4}, rng, 0.5));
  const Tensor r = random_tensor({3, 4}, rng);
  auto loss = [&](bool grads) {
    const Tensor y = dense(x.value, w.value, b.value);
    if (grads) {
      Tensor gx;
      dense_backward(x.value, w.value, r, &gx, &w.grad, &b.grad);
      add_inplace(x.grad, gx);
    }
    return project(y, r);
  };
  return {"dense", grad_check(loss, {&x, &w, &b}, opt)};
}

LayerGradResult check_activation(Activation kind, Rng& rng, const GradCheckOptions& opt) {
  Parameter x("input", kind == Activation::relu ? kink_free({2, 3, 4, 4}, rng) : random_tensor({2, 3, 4, 4}, rng, 2.0));
  const Tensor r = random_tensor(x.value.shape(), rng);
  auto loss = [&](bool grads) {
    const Tensor y = activation(x.value, kind);
    if (grads) add_inplace(x.grad, activation_backward(x.value, y, r, kind));
    return project(y, r);
  };
  return {kind == Activation::relu ? "relu" : "sigmoid", grad_check(loss, {&x}, opt)};
}

LayerGradResult check_pool(Rng& rng, const GradCheckOptions& opt) {
  Parameter x("input", random_tensor({2, 3, 5, 4}, rng));
  const Tensor r = random_tensor({2, 3}, rng);
  auto loss = [&](bool grads) {
    const Tensor y = global_avg_pool(x.value);
    if (grads) add_inplace(x.grad, global_avg_pool_backward(x.value.shape(), r));
    return project(y, r);
  };
  return {"global_avg_pool", grad_check(loss, {&x}, opt)};
}

LayerGradResult check_mse(Rng& rng, const GradCheckOptions& opt) {
  Parameter pred("pred", random_tensor({2, 1, 4, 4}, rng));
  const Tensor target = random_tensor(pred.value.shape(), rng);
  auto loss = [&](bool grads) {
    LossResult l = loss_mse(pred.value, target);
    if (grads) add_inplace(pred.grad, l.grad);
    return l.value;
  };
  return {"loss_mse", grad_check(loss, {&pred}, opt)};
}

LayerGradResult check_bce(Rng& rng, const GradCheckOptions& opt) {
  Parameter logits("logits", random_tensor({6, 1}, rng, 2.0));
  Tensor target({6, 1});
  for (auto& v : target.values()) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
  auto loss = [&](bool grads) {
    LossResult l = loss_bce_logits(logits.value, target);
    if (grads) add_inplace(logits.grad, l.grad);
    return l.value;
  };
  return {"loss_bce_logits", grad_check(loss, {&logits}, opt)};
}

}  // namespace

std::vector<LayerGradResult> layer_grad_suite(std::uint64_t seed, const GradCheckOptions& options) {
  Rng rng(derive_seed(seed, "grad-suite"));
  std::vector<LayerGradResult> out;
  for (std::size_t k : {1u, 3u}) {
    for (int d : {1, 4}) out.push_back(check_conv(k, d, rng, options));
  }
  out.push_back(check_dense(rng, options));
  out.push_back(check_activation(Activation::relu, rng, options));
  out.push_back(check_activation(Activation::sigmoid, rng, options));
  out.push_back(check_pool(rng, options));
  out.push_back(check_mse(rng, options));
  out.push_back(check_bce(rng, options));
  return out;
}

}  // namespace ccc::nn
