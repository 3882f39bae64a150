#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/nn/parameter.hpp"
#include "ccc/nn/tensor.hpp"

namespace ccc::nn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Serialized model parameters plus architecture and training provenance.
///
/// File layout (all integers little-endian):
///
///   offset 0   8 bytes   magic "CCCCKPT1"
///   offset 8   8 bytes   uint64 header length L
///   offset 16  L bytes   UTF-8 JSON header
///   offset 16+L          payload: float32 little-endian tensors
///
/// The header is an object with keys "format", "version", "role",
/// "architecture", "provenance" and "tensors"; every "tensors" entry holds
/// "name", "shape", "offset" and "nbytes", with offsets relative to the
/// payload start. Tensors are laid out back to back in header order.
struct ModelCheckpoint {
  std::string role;  // "segmentation" or "classifier"
  nlohmann::json architecture = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  void put(std::string name, Tensor value);
};

std::vector<std::uint8_t> serialize_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a digest of `value.dump()`, hex encoded.
std::string config_hash(const nlohmann::json& value);

}  // namespace ccc::nn
