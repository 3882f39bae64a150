#include "ccc/train/clips.hpp"

#include <fmt/format.h>

#include "ccc/data/annotation_io.hpp"
#include "ccc/error.hpp"
#include "ccc/train/pretrain.hpp"

namespace ccc::train {

std::vector<double> frame_vesselness(const models::Segmenter& seg, const data::AngioSequence& seq) {
  std::vector<double> scores;
  scores.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) {
    const nn::Tensor x = segmentation_input(frame).reshaped({1, 1, frame.dim(0), frame.dim(1)});
    scores.push_back(models::vesselness_score(seg.predict(x)));
  }
  return scores;
}

std::vector<data::Clip> build_clips(const std::vector<data::StoredSequence>& sequences,
                                    const std::map<std::string, data::CccAnnotation>& annotations,
                                    const models::Segmenter& vesselness_model) {
  std::vector<data::Clip> clips;
  clips.reserve(sequences.size());
  for (const auto& s : sequences) {
    auto it = annotations.find(s.sequence.ica_id);
    data::Clip clip = it != annotations.end()
                          ? data::select_clip_annotated(s.sequence, it->second)
                          : data::select_clip_by_vesselness(s.sequence, frame_vesselness(vesselness_model, s.sequence));
    clips.push_back(data::zscore_normalize(std::move(clip)));
  }
  return clips;
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  LoadedDataset ds;
  ds.sequences = data::read_sequence_store(dir);
  if (ds.sequences.empty()) throw IoError(fmt::format("no sequence directories under {}", dir.string()));
  const auto ann_path = dir / "annotations.json";
  if (std::filesystem::exists(ann_path)) {
    std::map<std::pair<std::string, std::string>, data::SequenceExtent> extents;
    for (const auto& s : ds.sequences) {
      extents[{s.sequence.patient_id, s.sequence.ica_id}] = {s.sequence.frames.size(), s.sequence.height(),
                                                             s.sequence.width()};
    }
    ds.annotations = data::parse_annotation_file(
        ann_path, [&](const std::string& patient, const std::string& ica) -> std::optional<data::SequenceExtent> {
          auto it = extents.find({patient, ica});
          if (it == extents.end()) return std::nullopt;
          return it->second;
        });
  }
  return ds;
}

std::map<std::string, data::CccAnnotation> index_annotations(const std::vector<data::CccAnnotation>& annotations) {
  std::map<std::string, data::CccAnnotation> out;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    if (!out.emplace(annotations[i].ica_id, annotations[i]).second) {
      throw ValidationError(i, "ica_id", fmt::format("record {}: duplicate annotation for {}", i, annotations[i].ica_id));
    }
  }
  return out;
}

}  // namespace ccc::train
