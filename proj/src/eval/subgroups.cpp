#include "ccc/eval/subgroups.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::eval {

std::string to_string(Grouping g) {
  switch (g) {
    case Grouping::rentrop: return "rentrop";
    case Grouping::flow_grade: return "flow_grade";
    case Grouping::size_tercile: return "size_tercile";
  }
  return "rentrop";
}

Grouping parse_grouping(const std::string& text) {
  if (text == "rentrop") return Grouping::rentrop;
  if (text == "flow_grade") return Grouping::flow_grade;
  if (text == "size_tercile") return Grouping::size_tercile;
  throw ConfigError("grouping", fmt::format("unknown grouping '{}' (expected rentrop, flow_grade or size_tercile)", text));
}

TercileSplit tercile_split(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) throw ValidationError(std::nullopt, "sizes", fmt::format("tercile split needs >= 3 values, got {}", n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const std::size_t g1 = (n + 2) / 3;
  const std::size_t g2 = (n - g1 + 1) / 2;
  TercileSplit out;
  out.group.assign(n, 3);
  for (std::size_t r = 0; r < n; ++r) out.group[order[r]] = r < g1 ? 1 : r < g1 + g2 ? 2 : 3;
  out.sizes[0] = g1;
  out.sizes[1] = g2;
  out.sizes[2] = n - g1 - g2;
  out.cut1 = values[order[g1 - 1]];
  out.cut2 = values[order[g1 + g2 - 1]];
  return out;
}

SubgroupReport subgroup_sensitivity(std::span<const PositiveCase> cases,
                                    const std::map<std::string, data::CccAnnotation>& annotations, Grouping grouping,
                                    double threshold) {
  SubgroupReport rep;
  rep.grouping = grouping;
  std::vector<std::pair<const PositiveCase*, const data::CccAnnotation*>> included;
  for (const auto& c : cases) {
    auto it = annotations.find(c.ica_id);
    if (it == annotations.end()) {
      rep.exclusions.push_back({c.ica_id, "no annotation"});
      continue;
    }
    included.emplace_back(&c, &it->second);
  }

  std::vector<int> group_of;
  std::vector<std::string> labels;
  std::vector<std::pair<const PositiveCase*, const data::CccAnnotation*>> kept;
  if (grouping == Grouping::size_tercile) {
    std::vector<std::pair<const PositiveCase*, const data::CccAnnotation*>> sized;
    std::vector<double> sizes;
    for (const auto& [c, a] : included) {
      if (!(a->collateral_size_px > 0.0)) {
        rep.exclusions.push_back({c->ica_id, "collateral_size_px missing or not positive"});
        continue;
      }
      sized.emplace_back(c, a);
      sizes.push_back(a->collateral_size_px);
    }
    if (sizes.size() >= 3) {
      const TercileSplit split = tercile_split(sizes);
      rep.cuts = std::make_pair(split.cut1, split.cut2);
      group_of = split.group;
      kept = std::move(sized);
      labels = {fmt::format("<= {:g}", split.cut1), fmt::format("{:g} - {:g}", split.cut1, split.cut2),
                fmt::format("> {:g}", split.cut2)};
    } else {
      for (const auto& [c, a] : sized) rep.exclusions.push_back({c->ica_id, "fewer than 3 sized cases for terciles"});
      labels = {"tercile 1", "tercile 2", "tercile 3"};
    }
  } else {
    const int lo = grouping == Grouping::rentrop ? 1 : data::kFlowMin;
    const int hi = grouping == Grouping::rentrop ? data::kRentropMax : data::kFlowMax;
    for (int g = lo; g <= hi; ++g) labels.push_back(std::to_string(g));
    for (const auto& [c, a] : included) {
      const int v = grouping == Grouping::rentrop ? a->rentrop_grade : a->flow_grade;
      if (v < lo || v > hi) {
        rep.exclusions.push_back({c->ica_id, fmt::format("{} {} outside groups {}..{}", to_string(grouping), v, lo, hi)});
        continue;
      }
      kept.emplace_back(c, a);
      group_of.push_back(v - lo + 1);
    }
  }

  rep.groups.resize(labels.size());
  for (std::size_t g = 0; g < labels.size(); ++g) rep.groups[g].label = labels[g];
  for (std::size_t i = 0; i < kept.size(); ++i) {
    auto& row = rep.groups[static_cast<std::size_t>(group_of[i] - 1)];
    ++row.n;
    kept[i].first->probability > threshold ? ++row.tp : ++row.fn;
  }
  for (auto& row : rep.groups) {
    if (row.n > 0) row.sensitivity = static_cast<double>(row.tp) / static_cast<double>(row.n);
  }
  return rep;
}

}  // namespace ccc::eval
