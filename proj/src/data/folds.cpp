#include "ccc/data/folds.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ccc/error.hpp"
#include "ccc/nn/rng.hpp"

namespace ccc::data {

int FoldAssignment::fold(const std::string& patient_id) const {
  const auto it = fold_of.find(patient_id);
  if (it == fold_of.end()) throw ValidationError(std::nullopt, "patient_id", fmt::format("unknown patient {}", patient_id));
  return it->second;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& [id, f] : fold_of) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment patient_kfold(const std::vector<PatientRecord>& patients, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k", fmt::format("k must be >= 2, got {}", k));
  std::vector<std::string> ids;
  ids.reserve(patients.size());
  for (const auto& p : patients) ids.push_back(p.patient_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError(std::nullopt, "patient_id", "patient ids must be unique");
  }
  if (ids.size() < static_cast<std::size_t>(k)) {
    throw ConfigError("k", fmt::format("{} patients cannot fill {} folds", ids.size(), k));
  }
  nn::Rng rng(nn::derive_seed(seed, "kfold"));
  rng.shuffle(ids);
  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) out.fold_of[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return out;
}

}  // namespace ccc::data
