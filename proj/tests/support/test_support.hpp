#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccc/data/clip.hpp"
#include "ccc/nn/rng.hpp"
#include "ccc/nn/tensor.hpp"

namespace ccc::test {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

nn::Tensor random_tensor(const nn::Shape& shape, nn::Rng& rng, double lo = -1.0, double hi = 1.0);

/// Clip whose frames hold a bright square (label ccc) or a uniform field
/// (no_ccc) plus small noise; trivially separable by the classifier.
data::Clip toy_clip(int label, std::size_t size, nn::Rng& rng, const std::string& patient_id);

std::string read_text(const std::filesystem::path& path);

std::filesystem::path fixture_path(const std::string& leaf);
std::filesystem::path docs_path(const std::string& leaf);

}  // namespace ccc::test
