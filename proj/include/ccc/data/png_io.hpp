#pragma once

#include <filesystem>

#include "ccc/nn/tensor.hpp"

namespace ccc::data {

/// Loads an 8- or 16-bit grayscale PNG as [H,W] floats in [0,1].
nn::Tensor read_png_gray(const std::filesystem::path& path);

/// Writes [H,W] values (clamped to [0,1]) as a 16-bit grayscale PNG.
void write_png_gray16(const nn::Tensor& image, const std::filesystem::path& path);

}  // namespace ccc::data
