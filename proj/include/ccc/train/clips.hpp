#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ccc/data/clip.hpp"
#include "ccc/data/sequence_store.hpp"
#include "ccc/models/segmenter.hpp"

namespace ccc::train {

/// Vesselness of every frame: mean clamped segmentation output.
std::vector<double> frame_vesselness(const models::Segmenter& seg, const data::AngioSequence& seq);

/// One z-scored clip per sequence. Annotated sequences give a CCC clip around
/// the annotated frame; the rest give a no-CCC clip around the frame of
/// highest vesselness. Output order follows `sequences`.
std::vector<data::Clip> build_clips(const std::vector<data::StoredSequence>& sequences,
                                    const std::map<std::string, data::CccAnnotation>& annotations,
                                    const models::Segmenter& vesselness_model);

struct LoadedDataset {
  std::vector<data::StoredSequence> sequences;  // ordered by (patient_id, ica_id)
  std::vector<data::CccAnnotation> annotations;
};

/// Sequence store under `dir` plus `dir`/annotations.json (absent file means
/// no annotations). Annotations are validated against their sequences.
LoadedDataset load_dataset(const std::filesystem::path& dir);

/// Annotations keyed by ica_id; throws on duplicates.
std::map<std::string, data::CccAnnotation> index_annotations(const std::vector<data::CccAnnotation>& annotations);

}  // namespace ccc::train
