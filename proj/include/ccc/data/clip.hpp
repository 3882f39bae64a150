#pragma once

#include <array>
#include <span>
#include <string>

#include "ccc/data/sequence.hpp"

namespace ccc::data {

inline constexpr std::size_t kClipFrames = 11;
inline constexpr std::size_t kClipHalfWidth = 5;

enum class ClipLabel { no_ccc = 0, ccc = 1 };

/// An 11-frame window of a sequence, the unit fed to the classifier.
struct Clip {
  nn::Tensor frames;  // [11,H,W]
  ClipLabel label = ClipLabel::no_ccc;
  std::string patient_id;
  std::string ica_id;
  std::array<std::size_t, kClipFrames> selected_indices{};

  int label_value() const noexcept { return label == ClipLabel::ccc ? 1 : 0; }
};

/// First index of the 11-frame window centered on `center`, shifted by the
/// minimal offset that keeps it inside [0, frame_count).
std::size_t clip_window_start(std::size_t center, std::size_t frame_count);

/// Window around the annotated frame; label ccc.
Clip select_clip_annotated(const AngioSequence& seq, const CccAnnotation& ann);

/// Window around argmax(scores) (lowest index on ties); label no_ccc.
Clip select_clip_by_vesselness(const AngioSequence& seq, std::span<const double> scores);

/// Joint z-score over all pixels of the clip (population std). If the std is
/// below 1e-8 every value becomes 0.
Clip zscore_normalize(Clip clip);
void zscore_inplace(nn::Tensor& values);

}  // namespace ccc::data
