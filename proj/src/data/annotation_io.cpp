#include "ccc/data/annotation_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::data {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* name, std::optional<std::size_t> record) {
  if (!j.is_object() || !j.contains(name)) {
    throw ValidationError(record, name, fmt::format("record {}: missing required field '{}'",
                                                    record ? std::to_string(*record) : "?", name));
  }
  return j.at(name);
}

std::string record_label(std::optional<std::size_t> record) { return record ? std::to_string(*record) : "?"; }

template <typename T>
T typed(const json& j, const char* name, std::optional<std::size_t> record) {
  const json& v = field(j, name, record);
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw json::type_error::create(302, "expected a string", nullptr);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw json::type_error::create(302, "expected an integer", nullptr);
    } else {
      if (!v.is_number()) throw json::type_error::create(302, "expected a number", nullptr);
    }
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(record, name, fmt::format("record {}: field '{}' has the wrong type", record_label(record), name));
  }
}

Point2 point(const json& landmarks, const char* name, std::optional<std::size_t> record) {
  const json& v = field(landmarks, name, record);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(record, fmt::format("landmarks.{}", name),
                          fmt::format("record {}: landmark '{}' must be [x, y]", record_label(record), name));
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void check_range(int value, int lo, int hi, const char* name, std::optional<std::size_t> record) {
  if (value < lo || value > hi) {
    throw ValidationError(record, name, fmt::format("record {}: {} = {} outside {}..{}", record_label(record), name,
                                                    value, lo, hi));
  }
}

void check_inside(const Point2& p, const SequenceExtent& e, const char* name, std::optional<std::size_t> record) {
  if (!(p.x >= 0.0 && p.y >= 0.0 && p.x < static_cast<double>(e.width) && p.y < static_cast<double>(e.height))) {
    throw ValidationError(record, fmt::format("landmarks.{}", name),
                          fmt::format("record {}: landmark '{}' ({}, {}) outside the {}x{} image", record_label(record),
                                      name, p.x, p.y, e.width, e.height));
  }
}

}  // namespace

void validate_annotation(const CccAnnotation& ann, std::optional<std::size_t> record) {
  if (ann.patient_id.empty()) throw ValidationError(record, "patient_id", fmt::format("record {}: empty patient_id", record_label(record)));
  if (ann.ica_id.empty()) throw ValidationError(record, "ica_id", fmt::format("record {}: empty ica_id", record_label(record)));
  if (ann.frame_index < 0) {
    throw ValidationError(record, "frame_index", fmt::format("record {}: negative frame_index", record_label(record)));
  }
  check_range(ann.rentrop_grade, kRentropMin, kRentropMax, "rentrop_grade", record);
  check_range(ann.flow_grade, kFlowMin, kFlowMax, "flow_grade", record);
  check_range(ann.blush_grade, kBlushMin, kBlushMax, "blush_grade", record);
  if (!(std::isfinite(ann.collateral_size_px) && ann.collateral_size_px > 0.0)) {
    throw ValidationError(record, "collateral_size_px",
                          fmt::format("record {}: collateral_size_px must be positive", record_label(record)));
  }
  for (const auto* p : {&ann.landmarks.collateral, &ann.landmarks.donor, &ann.landmarks.receiver}) {
    if (!std::isfinite(p->x) || !std::isfinite(p->y)) {
      throw ValidationError(record, "landmarks", fmt::format("record {}: non-finite landmark", record_label(record)));
    }
  }
}

void validate_annotation(const CccAnnotation& ann, const SequenceExtent& extent, std::optional<std::size_t> record) {
  validate_annotation(ann, record);
  if (static_cast<std::size_t>(ann.frame_index) >= extent.frame_count) {
    throw ValidationError(record, "frame_index", fmt::format("record {}: frame_index {} but the sequence has {} frames",
                                                             record_label(record), ann.frame_index, extent.frame_count));
  }
  check_inside(ann.landmarks.collateral, extent, "collateral", record);
  check_inside(ann.landmarks.donor, extent, "donor", record);
  check_inside(ann.landmarks.receiver, extent, "receiver", record);
}

namespace {

// ordered_json keeps the documented field order in files.
nlohmann::ordered_json annotation_to_ordered_json(const CccAnnotation& a) {
  nlohmann::ordered_json j;
  j["patient_id"] = a.patient_id;
  j["ica_id"] = a.ica_id;
  j["frame_index"] = a.frame_index;
  j["landmarks"] = {{"collateral", {a.landmarks.collateral.x, a.landmarks.collateral.y}},
                    {"donor", {a.landmarks.donor.x, a.landmarks.donor.y}},
                    {"receiver", {a.landmarks.receiver.x, a.landmarks.receiver.y}}};
  j["rentrop_grade"] = a.rentrop_grade;
  j["pathway"] = a.pathway;
  j["flow_grade"] = a.flow_grade;
  j["blush_grade"] = a.blush_grade;
  j["donor_segment"] = a.donor_segment;
  j["receiving_segment"] = a.receiving_segment;
  j["collateral_size_px"] = a.collateral_size_px;
  return j;
}

}  // namespace

nlohmann::json annotation_to_json(const CccAnnotation& a) { return nlohmann::json::parse(annotation_to_ordered_json(a).dump()); }

CccAnnotation annotation_from_json(const nlohmann::json& j, std::optional<std::size_t> record) {
  if (!j.is_object()) throw ValidationError(record, "record", fmt::format("record {} is not an object", record_label(record)));
  CccAnnotation a;
  a.patient_id = typed<std::string>(j, "patient_id", record);
  a.ica_id = typed<std::string>(j, "ica_id", record);
  a.frame_index = typed<int>(j, "frame_index", record);
  const json& lm = field(j, "landmarks", record);
  a.landmarks.collateral = point(lm, "collateral", record);
  a.landmarks.donor = point(lm, "donor", record);
  a.landmarks.receiver = point(lm, "receiver", record);
  a.rentrop_grade = typed<int>(j, "rentrop_grade", record);
  a.pathway = typed<std::string>(j, "pathway", record);
  a.flow_grade = typed<int>(j, "flow_grade", record);
  a.blush_grade = typed<int>(j, "blush_grade", record);
  a.donor_segment = typed<std::string>(j, "donor_segment", record);
  a.receiving_segment = typed<std::string>(j, "receiving_segment", record);
  a.collateral_size_px = typed<double>(j, "collateral_size_px", record);
  validate_annotation(a, record);
  return a;
}

std::vector<CccAnnotation> parse_annotations(const std::string& text, const ExtentLookup& lookup) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::nullopt, "file", fmt::format("annotation file is not valid JSON: {}", e.what()));
  }
  if (!doc.is_array()) throw ValidationError(std::nullopt, "file", "annotation file must hold a JSON array");
  std::vector<CccAnnotation> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    CccAnnotation a = annotation_from_json(doc[i], i);
    if (lookup) {
      const auto extent = lookup(a.patient_id, a.ica_id);
      if (!extent) {
        throw ValidationError(i, "ica_id", fmt::format("record {}: no sequence {} for patient {}", i, a.ica_id, a.patient_id));
      }
      validate_annotation(a, *extent, i);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<CccAnnotation> parse_annotation_file(const std::filesystem::path& path, const ExtentLookup& lookup) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open annotation file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_annotations(buf.str(), lookup);
}

void write_annotation_file(const std::vector<CccAnnotation>& annotations, const std::filesystem::path& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    validate_annotation(annotations[i], i);
    arr.push_back(annotation_to_ordered_json(annotations[i]));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write annotation file {}", path.string()));
  out << arr.dump(2) << '\n';
}

nlohmann::json centerlines_to_json(const CenterlineSet& set) {
  json arr = json::array();
  for (const auto& line : set.polylines) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back({p.x, p.y, p.radius});
    arr.push_back(std::move(pts));
  }
  return arr;
}

CenterlineSet centerlines_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError(std::nullopt, "centerlines", "centerline file must hold a JSON array");
  CenterlineSet set;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array()) throw ValidationError(i, "polyline", fmt::format("polyline {} is not an array", i));
    Polyline line;
    for (const auto& p : j[i]) {
      if (!p.is_array() || p.size() != 3) {
        throw ValidationError(i, "point", fmt::format("polyline {}: points must be [x, y, radius_px]", i));
      }
      line.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    set.polylines.push_back(std::move(line));
  }
  set.validate();
  return set;
}

CenterlineSet read_centerline_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open centerline file {}", path.string()));
  try {
    return centerlines_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError(std::nullopt, "centerlines", fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_centerline_file(const CenterlineSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write centerline file {}", path.string()));
  out << centerlines_to_json(set).dump() << '\n';
}

}  // namespace ccc::data
