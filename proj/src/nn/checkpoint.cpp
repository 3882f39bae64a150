#include "ccc/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::nn {
namespace {

constexpr char kMagic[8] = {'C', 'C', 'C', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

const Tensor* ModelCheckpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

const Tensor& ModelCheckpoint::get(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw ValidationError(std::nullopt, name, fmt::format("checkpoint has no tensor named '{}'", name));
  return *t;
}

void ModelCheckpoint::put(std::string name, Tensor value) {
  for (auto& t : tensors) {
    if (t.name == name) {
      t.value = std::move(value);
      return;
    }
  }
  tensors.push_back({std::move(name), std::move(value)});
}

std::vector<std::uint8_t> serialize_checkpoint(const ModelCheckpoint& ckpt) {
  nlohmann::json header;
  header["format"] = "ccc-checkpoint";
  header["version"] = 1;
  header["role"] = ckpt.role;
  header["architecture"] = ckpt.architecture;
  header["provenance"] = ckpt.provenance;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    const std::uint64_t nbytes = t.value.size() * 4;
    header["tensors"].push_back({{"name", t.name}, {"shape", t.value.shape()}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : ckpt.tensors) {
    for (float f : t.value.values()) put_f32(out, f);
  }
  return out;
}

ModelCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw ValidationError(std::nullopt, "magic", "not a checkpoint file (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) throw ValidationError(std::nullopt, "header", "truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::nullopt, "header", fmt::format("checkpoint header is not JSON: {}", e.what()));
  }
  if (header.value("format", "") != "ccc-checkpoint" || header.value("version", 0) != 1) {
    throw ValidationError(std::nullopt, "format", "unsupported checkpoint format or version");
  }
  ModelCheckpoint ckpt;
  ckpt.role = header.at("role").get<std::string>();
  ckpt.architecture = header.at("architecture");
  ckpt.provenance = header.at("provenance");
  const std::size_t payload = 16 + header_len;
  std::size_t index = 0;
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (nbytes != shape_numel(shape) * 4 || payload + offset + nbytes > bytes.size()) {
      throw ValidationError(index, name, fmt::format("tensor '{}' has an inconsistent size or offset", name));
    }
    std::vector<float> values(shape_numel(shape));
    const std::uint8_t* p = bytes.data() + payload + offset;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f32(p + 4 * i);
    ckpt.tensors.push_back({name, Tensor(shape, std::move(values))});
    ++index;
  }
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write checkpoint {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing checkpoint {}", path.string()));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

std::string config_hash(const nlohmann::json& value) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : value.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace ccc::nn
