#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ccc::data {

struct PatientRecord {
  std::string patient_id;
  std::size_t ica_count = 1;
};

struct FoldAssignment {
  int k = 4;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_of;

  int fold(const std::string& patient_id) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Patient-level folds: ids are sorted, shuffled with `seed`, then dealt round-robin.
FoldAssignment patient_kfold(const std::vector<PatientRecord>& patients, int k, std::uint64_t seed);

}  // namespace ccc::data
