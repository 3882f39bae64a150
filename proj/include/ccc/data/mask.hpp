#pragma once

#include "ccc/data/sequence.hpp"
#include "ccc/nn/tensor.hpp"

namespace ccc::data {

struct MaskConfig {
  double sigma_px = 0.75;
  void validate() const;
};

/// Inserts interpolated points so consecutive points are at most `spacing` apart.
/// Radii are interpolated linearly along each segment.
Polyline densify(const Polyline& line, double spacing = 0.5);

/// Soft vessel mask [H,W] in [0,1]. Pixel (row y, column x) is located at (x, y).
/// value(p) = max over densified points c of exp(−max(0, |p−c| − r_c)² / (2σ²)).
nn::Tensor gaussian_mask(const CenterlineSet& centerlines, std::size_t height, std::size_t width,
                         const MaskConfig& cfg = {});

}  // namespace ccc::data
