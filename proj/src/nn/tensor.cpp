#include "ccc/nn/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::nn {

std::string shape_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (shape_[i] == 0) {
      throw ShapeError(fmt::format("axis {}", i),
                       fmt::format("tensor shape {} has a zero extent", shape_string(shape_)));
    }
  }
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("size", fmt::format("shape {} needs {} values, got {}", shape_string(shape_),
                                         shape_numel(shape_), data_.size()));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError(fmt::format("axis {}", axis),
                     fmt::format("axis {} out of range for shape {}", axis, shape_string(shape_)));
  }
  return shape_[axis];
}

void Tensor::reshape(Shape shape) {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("size", fmt::format("cannot reshape {} to {}", shape_string(shape_), shape_string(shape)));
  }
  shape_ = std::move(shape);
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

Tensor Tensor::reshaped(Shape shape) && {
  reshape(std::move(shape));
  return std::move(*this);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor::bitwise_equal(const Tensor& other) const noexcept {
  return shape_ == other.shape_ && data_.size() == other.data_.size() &&
         (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

Tensor stack(std::span<const Tensor* const> items) {
  if (items.empty()) throw ShapeError("batch", "cannot stack zero tensors");
  const Shape& inner = items.front()->shape();
  Shape shape{items.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Tensor out(shape);
  const std::size_t n = items.front()->size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i]->shape() != inner) {
      throw ShapeError("batch", fmt::format("stack item {} has shape {}, expected {}", i,
                                            shape_string(items[i]->shape()), shape_string(inner)));
    }
    std::copy_n(items[i]->data(), n, out.data() + i * n);
  }
  return out;
}

Tensor stack(const std::vector<Tensor>& items) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(items.size());
  for (const auto& t : items) ptrs.push_back(&t);
  return stack(std::span<const Tensor* const>(ptrs));
}

void set_slice(Tensor& dst, std::size_t index, const Tensor& src) {
  const std::size_t n = dst.size() / dst.dim(0);
  if (index >= dst.dim(0) || src.size() != n) {
    throw ShapeError("batch", fmt::format("cannot place {} at slot {} of {}", shape_string(src.shape()), index,
                                          shape_string(dst.shape())));
  }
  std::copy_n(src.data(), n, dst.data() + index * n);
}

Tensor slice(const Tensor& src, std::size_t index) {
  if (index >= src.dim(0)) {
    throw ShapeError("batch", fmt::format("slot {} out of range for {}", index, shape_string(src.shape())));
  }
  Shape inner(src.shape().begin() + 1, src.shape().end());
  if (inner.empty()) inner = {1};
  Tensor out(inner);
  std::copy_n(src.data() + index * out.size(), out.size(), out.data());
  return out;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  if (dst.size() != src.size()) {
    throw ShapeError("size", fmt::format("cannot add {} into {}", shape_string(src.shape()), shape_string(dst.shape())));
  }
  float* d = dst.data();
  const float* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace ccc::nn
