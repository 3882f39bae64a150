#include "ccc/data/sequence.hpp"

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::data {

std::size_t AngioSequence::height() const {
  if (frames.empty()) throw ValidationError(std::nullopt, "frames", "sequence has no frames");
  return frames.front().dim(0);
}

std::size_t AngioSequence::width() const {
  if (frames.empty()) throw ValidationError(std::nullopt, "frames", "sequence has no frames");
  return frames.front().dim(1);
}

void AngioSequence::validate() const {
  if (patient_id.empty()) throw ValidationError(std::nullopt, "patient_id", "patient_id is empty");
  if (ica_id.empty()) throw ValidationError(std::nullopt, "ica_id", "ica_id is empty");
  if (frames.empty()) throw ValidationError(std::nullopt, "frames", fmt::format("sequence {} has no frames", ica_id));
  const auto& first = frames.front().shape();
  if (first.size() != 2) throw ShapeError("frame", fmt::format("frames of {} must be [H,W]", ica_id));
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].shape() != first) {
      throw ShapeError(fmt::format("frame {}", i), fmt::format("frame {} of {} has shape {}, expected {}", i, ica_id,
                                                               nn::shape_string(frames[i].shape()),
                                                               nn::shape_string(first)));
    }
  }
  if (pixel_spacing_mm && !(*pixel_spacing_mm > 0.0)) {
    throw ValidationError(std::nullopt, "pixel_spacing_mm", "pixel_spacing_mm must be positive");
  }
}

void CenterlineSet::validate() const {
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    if (polylines[i].size() < 2) {
      throw ValidationError(i, "polyline", fmt::format("polyline {} has fewer than 2 points", i));
    }
    for (const auto& p : polylines[i]) {
      if (!(p.radius > 0.0)) throw ValidationError(i, "radius", fmt::format("polyline {} has a non-positive radius", i));
    }
  }
}

}  // namespace ccc::data
