#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccc/data/sequence.hpp"

namespace ccc::eval {

enum class Grouping { rentrop, flow_grade, size_tercile };

std::string to_string(Grouping g);
Grouping parse_grouping(const std::string& text);

struct TercileSplit {
  double cut1 = 0.0;  // largest value of group 1
  double cut2 = 0.0;  // largest value of group 2
  std::vector<int> group;  // 1..3 per input value, in input order
  std::size_t sizes[3] = {0, 0, 0};
};

/// Stable ascending sort (ties keep input order); the first ceil(n/3) values
/// form group 1, the next ceil((n−|g1|)/2) group 2, the rest group 3.
TercileSplit tercile_split(std::span<const double> values);

struct PositiveCase {
  std::string ica_id;
  double probability = 0.0;
};

struct SubgroupRow {
  std::string label;
  std::size_t n = 0, tp = 0, fn = 0;
  std::optional<double> sensitivity;  // empty for a group without samples
};

struct Exclusion {
  std::string ica_id;
  std::string reason;
};

struct SubgroupReport {
  Grouping grouping = Grouping::rentrop;
  std::vector<SubgroupRow> groups;
  std::vector<Exclusion> exclusions;
  std::optional<std::pair<double, double>> cuts;  // size_tercile only
};

/// Sensitivity per group over CCC-positive cases. Cases without an annotation
/// or whose attribute falls outside the grouping's groups are reported in
/// `exclusions`.
SubgroupReport subgroup_sensitivity(std::span<const PositiveCase> cases,
                                    const std::map<std::string, data::CccAnnotation>& annotations, Grouping grouping,
                                    double threshold = 0.5);

}  // namespace ccc::eval
