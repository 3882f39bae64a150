#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ccc/nn/tensor.hpp"

namespace ccc::data {

/// One ICA: an ordered stack of grayscale frames with intensities in [0,1].
struct AngioSequence {
  std::string patient_id;
  std::string ica_id;
  std::vector<nn::Tensor> frames;  // each [H,W]
  std::optional<double> pixel_spacing_mm;

  std::size_t frame_count() const noexcept { return frames.size(); }
  std::size_t height() const;
  std::size_t width() const;

  /// Checks ids, frame count and that every frame shares one H×W.
  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Landmarks {
  Point2 collateral;
  Point2 donor;
  Point2 receiver;
  bool operator==(const Landmarks&) const = default;
};

/// Expert annotation of the single marked frame of a CCC-positive ICA.
struct CccAnnotation {
  std::string patient_id;
  std::string ica_id;
  int frame_index = 0;
  Landmarks landmarks;
  int rentrop_grade = 0;  // 0..3
  std::string pathway;
  int flow_grade = 1;   // 1..4
  int blush_grade = 0;  // 0..3
  std::string donor_segment;
  std::string receiving_segment;
  double collateral_size_px = 1.0;

  bool operator==(const CccAnnotation&) const = default;
};

inline constexpr int kRentropMin = 0, kRentropMax = 3;
inline constexpr int kFlowMin = 1, kFlowMax = 4;
inline constexpr int kBlushMin = 0, kBlushMax = 3;

struct CenterlinePoint {
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;
  bool operator==(const CenterlinePoint&) const = default;
};

using Polyline = std::vector<CenterlinePoint>;

/// Vessel centerlines of one frame; each polyline has ≥2 points with radius > 0.
struct CenterlineSet {
  std::vector<Polyline> polylines;
  void validate() const;
  bool operator==(const CenterlineSet&) const = default;
};

}  // namespace ccc::data
