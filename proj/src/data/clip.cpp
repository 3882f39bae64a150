#include "ccc/data/clip.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::data {
namespace {

void require_frames(const AngioSequence& seq) {
  if (seq.frame_count() < kClipFrames) {
    throw ValidationError(std::nullopt, "frames",
                          fmt::format("sequence {} has {} frames, a clip needs {}", seq.ica_id, seq.frame_count(),
                                      kClipFrames));
  }
  seq.validate();
}

Clip build_clip(const AngioSequence& seq, std::size_t center, ClipLabel label) {
  const std::size_t start = clip_window_start(center, seq.frame_count());
  const std::size_t h = seq.height(), w = seq.width();
  Clip clip;
  clip.frames = nn::Tensor({kClipFrames, h, w});
  clip.label = label;
  clip.patient_id = seq.patient_id;
  clip.ica_id = seq.ica_id;
  for (std::size_t i = 0; i < kClipFrames; ++i) {
    clip.selected_indices[i] = start + i;
    nn::set_slice(clip.frames, i, seq.frames[start + i]);
  }
  return clip;
}

}  // namespace

std::size_t clip_window_start(std::size_t center, std::size_t frame_count) {
  if (frame_count < kClipFrames) {
    throw ValidationError(std::nullopt, "frames", fmt::format("{} frames cannot hold an {}-frame clip", frame_count,
                                                              kClipFrames));
  }
  const std::size_t max_start = frame_count - kClipFrames;
  const std::size_t start = center >= kClipHalfWidth ? center - kClipHalfWidth : 0;
  return std::min(start, max_start);
}

Clip select_clip_annotated(const AngioSequence& seq, const CccAnnotation& ann) {
  require_frames(seq);
  if (ann.frame_index < 0 || static_cast<std::size_t>(ann.frame_index) >= seq.frame_count()) {
    throw ValidationError(std::nullopt, "frame_index",
                          fmt::format("annotated frame {} outside sequence {} ({} frames)", ann.frame_index,
                                      seq.ica_id, seq.frame_count()));
  }
  return build_clip(seq, static_cast<std::size_t>(ann.frame_index), ClipLabel::ccc);
}

Clip select_clip_by_vesselness(const AngioSequence& seq, std::span<const double> scores) {
  require_frames(seq);
  if (scores.size() != seq.frame_count()) {
    throw ValidationError(std::nullopt, "scores", fmt::format("{} vesselness scores for {} frames", scores.size(),
                                                              seq.frame_count()));
  }
  // max_element returns the first maximum: lowest index wins ties.
  const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  return build_clip(seq, best, ClipLabel::no_ccc);
}

void zscore_inplace(nn::Tensor& values) {
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (float v : values.values()) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (float v : values.values()) sq += (v - mean) * (v - mean);
  const double stddev = std::sqrt(sq / n);
  if (stddev < 1e-8) {
    values.fill(0.0f);
    return;
  }
  for (float& v : values.values()) v = static_cast<float>((v - mean) / stddev);
}

Clip zscore_normalize(Clip clip) {
  zscore_inplace(clip.frames);
  return clip;
}

}  // namespace ccc::data
