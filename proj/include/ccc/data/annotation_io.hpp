#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/data/sequence.hpp"

namespace ccc::data {

/// Frame count and image size of the sequence an annotation refers to.
struct SequenceExtent {
  std::size_t frame_count = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Looks up (patient_id, ica_id); nullopt when the sequence is unknown.
using ExtentLookup = std::function<std::optional<SequenceExtent>(const std::string&, const std::string&)>;

/// Range checks that need no image context. Throws ValidationError.
void validate_annotation(const CccAnnotation& ann, std::optional<std::size_t> record = std::nullopt);
/// Frame index and landmark bounds against the referenced sequence.
void validate_annotation(const CccAnnotation& ann, const SequenceExtent& extent,
                         std::optional<std::size_t> record = std::nullopt);

nlohmann::json annotation_to_json(const CccAnnotation& ann);
CccAnnotation annotation_from_json(const nlohmann::json& j, std::optional<std::size_t> record = std::nullopt);

/// Reads a JSON array of annotation records. With a lookup, each record is also
/// checked against its sequence (unknown sequences are a validation error).
std::vector<CccAnnotation> parse_annotation_file(const std::filesystem::path& path,
                                                 const ExtentLookup& lookup = nullptr);
std::vector<CccAnnotation> parse_annotations(const std::string& text, const ExtentLookup& lookup = nullptr);

void write_annotation_file(const std::vector<CccAnnotation>& annotations, const std::filesystem::path& path);

nlohmann::json centerlines_to_json(const CenterlineSet& set);
CenterlineSet centerlines_from_json(const nlohmann::json& j);
CenterlineSet read_centerline_file(const std::filesystem::path& path);
void write_centerline_file(const CenterlineSet& set, const std::filesystem::path& path);

}  // namespace ccc::data
