#include "ccc/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::nn {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct ConvGeometry {
  std::size_t n, cin, h, w, cout, k, hout, wout;
  bool pointwise;  // 1x1, stride 1, no padding: im2col is the identity
};

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(fmt::format("{}.rank", what), fmt::format("{} must have rank {}, got shape {}", what, rank,
                                                               shape_string(t.shape())));
  }
}

ConvGeometry conv_geometry(const Tensor& input, const Tensor& weights, const Conv2dSpec& spec) {
  require_rank(input, 4, "input");
  require_rank(weights, 4, "weights");
  if (spec.stride < 1) throw ShapeError("stride", fmt::format("stride must be >= 1, got {}", spec.stride));
  if (spec.dilation < 1) throw ShapeError("dilation", fmt::format("dilation must be >= 1, got {}", spec.dilation));
  if (spec.padding < 0) throw ShapeError("padding", fmt::format("padding must be >= 0, got {}", spec.padding));
  if (weights.dim(2) != weights.dim(3)) {
    throw ShapeError("weights.kernel", fmt::format("kernel must be square, got {}", shape_string(weights.shape())));
  }
  if (weights.dim(1) != input.dim(1)) {
    throw ShapeError("Cin", fmt::format("input has {} channels but weights expect {}", input.dim(1), weights.dim(1)));
  }
  ConvGeometry g{};
  g.n = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = weights.dim(0);
  g.k = weights.dim(2);
  g.hout = conv2d_output_extent(g.h, g.k, spec, "H");
  g.wout = conv2d_output_extent(g.w, g.k, spec, "W");
  g.pointwise = g.k == 1 && spec.stride == 1 && spec.padding == 0;
  return g;
}

// Valid output range [lo, hi) along one axis for a kernel tap at offset `off`
// (input coordinate = out * stride + off).
inline void tap_range(std::ptrdiff_t off, std::ptrdiff_t extent, std::ptrdiff_t out_extent, std::ptrdiff_t stride,
                      std::ptrdiff_t& lo, std::ptrdiff_t& hi) {
  lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  hi = off > extent - 1 ? 0 : std::min<std::ptrdiff_t>(out_extent, (extent - 1 - off) / stride + 1);
  if (hi < lo) hi = lo;
}

void im2col(const float* img, const ConvGeometry& g, const Conv2dSpec& spec, float* col) {
  const auto s = static_cast<std::ptrdiff_t>(spec.stride);
  const auto hw_out = g.hout * g.wout;
  for (std::size_t c = 0; c < g.cin; ++c) {
    const float* plane = img + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      const std::ptrdiff_t offy = static_cast<std::ptrdiff_t>(ky) * spec.dilation - spec.padding;
      std::ptrdiff_t ylo, yhi;
      tap_range(offy, g.h, g.hout, s, ylo, yhi);
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const std::ptrdiff_t offx = static_cast<std::ptrdiff_t>(kx) * spec.dilation - spec.padding;
        std::ptrdiff_t xlo, xhi;
        tap_range(offx, g.w, g.wout, s, xlo, xhi);
        float* row = col + ((c * g.k + ky) * g.k + kx) * hw_out;
        std::fill(row, row + hw_out, 0.0f);
        for (std::ptrdiff_t oy = ylo; oy < yhi; ++oy) {
          const float* src = plane + (oy * s + offy) * static_cast<std::ptrdiff_t>(g.w);
          float* dst = row + oy * static_cast<std::ptrdiff_t>(g.wout);
          for (std::ptrdiff_t ox = xlo; ox < xhi; ++ox) dst[ox] = src[ox * s + offx];
        }
      }
    }
  }
}

void col2im_add(const float* col, const ConvGeometry& g, const Conv2dSpec& spec, float* img) {
  const auto s = static_cast<std::ptrdiff_t>(spec.stride);
  const auto hw_out = g.hout * g.wout;
  for (std::size_t c = 0; c < g.cin; ++c) {
    float* plane = img + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      const std::ptrdiff_t offy = static_cast<std::ptrdiff_t>(ky) * spec.dilation - spec.padding;
      std::ptrdiff_t ylo, yhi;
      tap_range(offy, g.h, g.hout, s, ylo, yhi);
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const std::ptrdiff_t offx = static_cast<std::ptrdiff_t>(kx) * spec.dilation - spec.padding;
        std::ptrdiff_t xlo, xhi;
        tap_range(offx, g.w, g.wout, s, xlo, xhi);
        const float* row = col + ((c * g.k + ky) * g.k + kx) * hw_out;
        for (std::ptrdiff_t oy = ylo; oy < yhi; ++oy) {
          float* dst = plane + (oy * s + offy) * static_cast<std::ptrdiff_t>(g.w);
          const float* src = row + oy * static_cast<std::ptrdiff_t>(g.wout);
          for (std::ptrdiff_t ox = xlo; ox < xhi; ++ox) dst[ox * s + offx] += src[ox];
        }
      }
    }
  }
}

}  // namespace

std::size_t conv2d_output_extent(std::size_t input, std::size_t kernel, const Conv2dSpec& spec, const char* axis) {
  const auto span = static_cast<std::ptrdiff_t>(input) + 2 * spec.padding -
                    static_cast<std::ptrdiff_t>(spec.dilation) * (static_cast<std::ptrdiff_t>(kernel) - 1) - 1;
  if (span < 0) {
    throw ShapeError(axis, fmt::format("dilated kernel ({}x{}, dilation {}) does not fit {} extent {} with padding {}",
                                       kernel, kernel, spec.dilation, axis, input, spec.padding));
  }
  return static_cast<std::size_t>(span / spec.stride + 1);
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, const Conv2dSpec& spec) {
  const ConvGeometry g = conv_geometry(input, weights, spec);
  if (bias.size() != g.cout) {
    throw ShapeError("Cout", fmt::format("bias has {} entries, weights have {} output channels", bias.size(), g.cout));
  }
  const std::size_t ckk = g.cin * g.k * g.k;
  const std::size_t hw_out = g.hout * g.wout;
  Tensor out({g.n, g.cout, g.hout, g.wout});
  FloatBuffer col(g.pointwise ? 0 : ckk * hw_out);
  ConstMapMat wm(weights.data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(ckk));
  for (std::size_t n = 0; n < g.n; ++n) {
    const float* img = input.data() + n * g.cin * g.h * g.w;
    const float* colp = img;
    if (!g.pointwise) {
      im2col(img, g, spec, col.data());
      colp = col.data();
    }
    ConstMapMat cm(colp, static_cast<Eigen::Index>(ckk), static_cast<Eigen::Index>(hw_out));
    MapMat om(out.data() + n * g.cout * hw_out, static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(hw_out));
    om.noalias() = wm * cm;
    for (std::size_t co = 0; co < g.cout; ++co) om.row(static_cast<Eigen::Index>(co)).array() += bias[co];
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weights, const Conv2dSpec& spec, const Tensor& grad_output,
                     Tensor* grad_input, Tensor* grad_weights, Tensor* grad_bias) {
  const ConvGeometry g = conv_geometry(input, weights, spec);
  const Shape expected{g.n, g.cout, g.hout, g.wout};
  if (grad_output.shape() != expected) {
    throw ShapeError("grad_output", fmt::format("grad_output shape {} != {}", shape_string(grad_output.shape()),
                                                shape_string(expected)));
  }
  if (grad_weights && grad_weights->shape() != weights.shape()) {
    throw ShapeError("grad_weights", "grad_weights must match the weight shape");
  }
  if (grad_bias && grad_bias->size() != g.cout) throw ShapeError("grad_bias", "grad_bias must have Cout entries");
  if (grad_input) {
    if (grad_input->shape() != input.shape()) *grad_input = Tensor(input.shape());
    else grad_input->fill(0.0f);
  }
  const std::size_t ckk = g.cin * g.k * g.k;
  const std::size_t hw_out = g.hout * g.wout;
  const auto ckk_i = static_cast<Eigen::Index>(ckk);
  const auto hw_i = static_cast<Eigen::Index>(hw_out);
  const auto cout_i = static_cast<Eigen::Index>(g.cout);
  ConstMapMat wm(weights.data(), cout_i, ckk_i);
  FloatBuffer col(g.pointwise || !grad_weights ? 0 : ckk * hw_out);
  FloatBuffer dcol(g.pointwise || !grad_input ? 0 : ckk * hw_out);
  for (std::size_t n = 0; n < g.n; ++n) {
    const float* img = input.data() + n * g.cin * g.h * g.w;
    ConstMapMat gm(grad_output.data() + n * g.cout * hw_out, cout_i, hw_i);
    if (grad_bias) {
      for (std::size_t co = 0; co < g.cout; ++co) (*grad_bias)[co] += gm.row(static_cast<Eigen::Index>(co)).sum();
    }
    if (grad_weights) {
      const float* colp = img;
      if (!g.pointwise) {
        im2col(img, g, spec, col.data());
        colp = col.data();
      }
      ConstMapMat cm(colp, ckk_i, hw_i);
      MapMat dwm(grad_weights->data(), cout_i, ckk_i);
      dwm.noalias() += gm * cm.transpose();
    }
    if (grad_input) {
      float* dimg = grad_input->data() + n * g.cin * g.h * g.w;
      if (g.pointwise) {
        MapMat dm(dimg, ckk_i, hw_i);
        dm.noalias() = wm.transpose() * gm;
      } else {
        MapMat dm(dcol.data(), ckk_i, hw_i);
        dm.noalias() = wm.transpose() * gm;
        col2im_add(dcol.data(), g, spec, dimg);
      }
    }
  }
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 2, "input");
  require_rank(weights, 2, "weights");
  if (input.dim(1) != weights.dim(1)) {
    throw ShapeError("Din", fmt::format("input has {} features but weights expect {}", input.dim(1), weights.dim(1)));
  }
  if (bias.size() != weights.dim(0)) {
    throw ShapeError("Dout", fmt::format("bias has {} entries, weights have {} outputs", bias.size(), weights.dim(0)));
  }
  const auto n = static_cast<Eigen::Index>(input.dim(0));
  const auto din = static_cast<Eigen::Index>(input.dim(1));
  const auto dout = static_cast<Eigen::Index>(weights.dim(0));
  Tensor out({input.dim(0), weights.dim(0)});
  ConstMapMat xm(input.data(), n, din);
  ConstMapMat wm(weights.data(), dout, din);
  MapMat om(out.data(), n, dout);
  om.noalias() = xm * wm.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dout; ++j) om(i, j) += bias[static_cast<std::size_t>(j)];
  }
  return out;
}

void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output, Tensor* grad_input,
                    Tensor* grad_weights, Tensor* grad_bias) {
  require_rank(grad_output, 2, "grad_output");
  const auto n = static_cast<Eigen::Index>(input.dim(0));
  const auto din = static_cast<Eigen::Index>(input.dim(1));
  const auto dout = static_cast<Eigen::Index>(weights.dim(0));
  if (grad_output.dim(0) != input.dim(0) || grad_output.dim(1) != weights.dim(0)) {
    throw ShapeError("grad_output", fmt::format("grad_output shape {} does not match [N,Dout]",
                                                shape_string(grad_output.shape())));
  }
  ConstMapMat xm(input.data(), n, din);
  ConstMapMat wm(weights.data(), dout, din);
  ConstMapMat gm(grad_output.data(), n, dout);
  if (grad_input) {
    *grad_input = Tensor(input.shape());
    MapMat dxm(grad_input->data(), n, din);
    dxm.noalias() = gm * wm;
  }
  if (grad_weights) {
    MapMat dwm(grad_weights->data(), dout, din);
    dwm.noalias() += gm.transpose() * xm;
  }
  if (grad_bias) {
    for (Eigen::Index j = 0; j < dout; ++j) (*grad_bias)[static_cast<std::size_t>(j)] += gm.col(j).sum();
  }
}

float sigmoid(float x) noexcept {
  if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
  const float e = std::exp(x);
  return e / (1.0f + e);
}

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out = input;
  if (kind == Activation::relu) {
    relu_inplace(out);
  } else {
    for (float& v : out.values()) v = sigmoid(v);
  }
  return out;
}

Tensor activation_backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Activation kind) {
  if (grad_output.size() != input.size() || output.size() != input.size()) {
    throw ShapeError("grad_output", "activation backward needs input, output and grad of one shape");
  }
  Tensor grad = grad_output;
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!(input[i] > 0.0f)) grad[i] = 0.0f;
    }
  } else {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= output[i] * (1.0f - output[i]);
  }
  return grad;
}

void relu_inplace(Tensor& t) noexcept {
  for (float& v : t.values()) v = v > 0.0f ? v : 0.0f;
}

void relu_backward_inplace(const Tensor& activation_output, Tensor& grad) noexcept {
  const float* a = activation_output.data();
  float* g = grad.data();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(a[i] > 0.0f)) g[i] = 0.0f;
  }
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 4, "input");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  Tensor out({n, c});
  for (std::size_t i = 0; i < n * c; ++i) {
    const float* p = input.data() + i * hw;
    double acc = 0.0;
    for (std::size_t j = 0; j < hw; ++j) acc += p[j];
    out[i] = static_cast<float>(acc / static_cast<double>(hw));
  }
  return out;
}

Tensor global_avg_pool_backward(const Shape& input_shape, const Tensor& grad_output) {
  if (input_shape.size() != 4 || grad_output.size() != input_shape[0] * input_shape[1]) {
    throw ShapeError("grad_output", "global_avg_pool_backward expects grad of shape [N,C]");
  }
  Tensor grad(input_shape);
  const std::size_t hw = input_shape[2] * input_shape[3];
  const float scale = 1.0f / static_cast<float>(hw);
  for (std::size_t i = 0; i < grad_output.size(); ++i) {
    std::fill_n(grad.data() + i * hw, hw, grad_output[i] * scale);
  }
  return grad;
}

}  // namespace ccc::nn
