#include "ccc/data/sequence_store.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ccc/data/annotation_io.hpp"
#include "ccc/data/png_io.hpp"
#include "ccc/error.hpp"

namespace ccc::data {
namespace fs = std::filesystem;

namespace {

std::string indexed(const char* stem, std::size_t i, const char* ext) { return fmt::format("{}_{:04d}{}", stem, i, ext); }

}  // namespace

void write_sequence_dir(const AngioSequence& seq, const std::vector<CenterlineSet>& centerlines, const fs::path& dir) {
  seq.validate();
  if (!centerlines.empty() && centerlines.size() != seq.frame_count()) {
    throw ValidationError(std::nullopt, "centerlines", "centerlines must be empty or one set per frame");
  }
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["patient_id"] = seq.patient_id;
  manifest["ica_id"] = seq.ica_id;
  manifest["frame_count"] = seq.frame_count();
  manifest["height"] = seq.height();
  manifest["width"] = seq.width();
  if (seq.pixel_spacing_mm) manifest["pixel_spacing_mm"] = *seq.pixel_spacing_mm;
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", (dir / "manifest.json").string()));
    out << manifest.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    write_png_gray16(seq.frames[i], dir / indexed("frame", i, ".png"));
    if (!centerlines.empty()) write_centerline_file(centerlines[i], dir / indexed("centerlines", i, ".json"));
  }
}

StoredSequence read_sequence_dir(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError(fmt::format("missing manifest.json in {}", dir.string()));
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::nullopt, "manifest", fmt::format("{}: {}", dir.string(), e.what()));
  }
  StoredSequence out;
  AngioSequence& seq = out.sequence;
  std::size_t n = 0, h = 0, w = 0;
  try {
    seq.patient_id = m.at("patient_id").get<std::string>();
    seq.ica_id = m.at("ica_id").get<std::string>();
    n = m.at("frame_count").get<std::size_t>();
    h = m.at("height").get<std::size_t>();
    w = m.at("width").get<std::size_t>();
    if (m.contains("pixel_spacing_mm") && !m["pixel_spacing_mm"].is_null()) {
      seq.pixel_spacing_mm = m["pixel_spacing_mm"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::nullopt, "manifest", fmt::format("{}: {}", dir.string(), e.what()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    nn::Tensor frame = read_png_gray(dir / indexed("frame", i, ".png"));
    if (frame.dim(0) != h || frame.dim(1) != w) {
      throw ValidationError(i, indexed("frame", i, ".png"),
                            fmt::format("{}: frame {} is {}x{}, manifest says {}x{}", dir.string(), i, frame.dim(1),
                                        frame.dim(0), w, h));
    }
    seq.frames.push_back(std::move(frame));
  }
  seq.validate();
  if (fs::exists(dir / indexed("centerlines", 0, ".json"))) {
    for (std::size_t i = 0; i < n; ++i) out.centerlines.push_back(read_centerline_file(dir / indexed("centerlines", i, ".json")));
  }
  return out;
}

std::vector<StoredSequence> read_sequence_store(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError(fmt::format("{} is not a directory", root.string()));
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<StoredSequence> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(read_sequence_dir(d));
  std::sort(out.begin(), out.end(), [](const StoredSequence& a, const StoredSequence& b) {
    return std::tie(a.sequence.patient_id, a.sequence.ica_id) < std::tie(b.sequence.patient_id, b.sequence.ica_id);
  });
  return out;
}

}  // namespace ccc::data
