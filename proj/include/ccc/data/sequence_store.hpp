#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ccc/data/sequence.hpp"

namespace ccc::data {

/// Sequence store layout, one directory per ICA:
///
///   <dir>/manifest.json          {"patient_id","ica_id","frame_count","height","width"[,"pixel_spacing_mm"]}
///   <dir>/frame_0000.png ...     grayscale frames
///   <dir>/centerlines_0000.json  optional per-frame vessel centerlines
struct StoredSequence {
  AngioSequence sequence;
  std::vector<CenterlineSet> centerlines;  // empty or one per frame
};

void write_sequence_dir(const AngioSequence& seq, const std::vector<CenterlineSet>& centerlines,
                        const std::filesystem::path& dir);
StoredSequence read_sequence_dir(const std::filesystem::path& dir);

/// Every subdirectory with a manifest.json, ordered by (patient_id, ica_id).
std::vector<StoredSequence> read_sequence_store(const std::filesystem::path& root);

}  // namespace ccc::data
