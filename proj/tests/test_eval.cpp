#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ccc/error.hpp"
#include "ccc/eval/confusion.hpp"
#include "ccc/eval/dice.hpp"
#include "ccc/eval/report.hpp"
#include "ccc/eval/subgroups.hpp"
#include "support/test_support.hpp"

namespace ccc::eval {
namespace {

std::vector<Prediction> predictions_for(const ConfusionMatrix& cm) {
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < cm.tp; ++i) out.push_back({0.9, 1});
  for (std::size_t i = 0; i < cm.fn; ++i) out.push_back({0.1, 1});
  for (std::size_t i = 0; i < cm.tn; ++i) out.push_back({0.2, 0});
  for (std::size_t i = 0; i < cm.fp; ++i) out.push_back({0.8, 0});
  return out;
}

TEST(Confusion, PerfectPredictions) {
  const std::vector<Prediction> p{{0.9, 1}, {0.7, 1}, {0.1, 0}, {0.3, 0}};
  const ConfusionMatrix cm = confusion(p);
  EXPECT_EQ(cm.fp, 0u);
  EXPECT_EQ(cm.fn, 0u);
  EXPECT_EQ(cm.tp, 2u);
  EXPECT_EQ(cm.tn, 2u);
}

TEST(Confusion, HalfIsNegative) {
  const std::vector<Prediction> p{{0.5, 1}, {0.5, 0}};
  const ConfusionMatrix cm = confusion(p);
  EXPECT_EQ(cm.fn, 1u);
  EXPECT_EQ(cm.tn, 1u);
  EXPECT_EQ(cm.tp + cm.fp, 0u);
}

TEST(Confusion, BestConfigurationCounts) {
  const ConfusionMatrix cm = confusion(predictions_for({135, 36, 132, 33}));
  EXPECT_EQ(cm, (ConfusionMatrix{135, 36, 132, 33}));
  EXPECT_EQ(cm.positives(), 168u);
  EXPECT_EQ(cm.negatives(), 168u);
}

TEST(Confusion, InvalidInputsThrow) {
  EXPECT_THROW(confusion(std::vector<Prediction>{}), ValidationError);
  EXPECT_THROW(confusion(std::vector<Prediction>{{0.4, 2}}), ValidationError);
}

TEST(Metrics, BestConfigurationMetrics) {
  ConfusionMatrix cm;
  cm.tp = 135;
  cm.fn = 33;
  cm.tn = 132;
  cm.fp = 36;
  const MetricsReport m = metrics(cm);
  EXPECT_NEAR(100.0 * m.accuracy, 79.5, 0.05);
  EXPECT_NEAR(100.0 * m.sensitivity, 80.4, 0.05);
  EXPECT_NEAR(100.0 * m.specificity, 78.6, 0.05);
  EXPECT_LT(consistency_residual(m), 1e-9);
}

TEST(Metrics, PerfectBalanced) {
  const MetricsReport m = metrics({10, 0, 10, 0});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.sensitivity, 1.0);
  EXPECT_EQ(m.specificity, 1.0);
}

TEST(Metrics, AllNegativeCalls) {
  ConfusionMatrix cm;
  cm.tn = 10;
  cm.fn = 10;
  const MetricsReport m = metrics(cm);
  EXPECT_EQ(m.sensitivity, 0.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_EQ(m.accuracy, 0.5);
}

TEST(Metrics, ZeroDenominatorsThrow) {
  EXPECT_THROW(metrics({}), UndefinedMetricError);
  try {
    metrics({3, 0, 0, 2});
    FAIL() << "expected UndefinedMetricError";
  } catch (const UndefinedMetricError& e) {
    EXPECT_EQ(e.metric(), "specificity");
  }
  try {
    metrics({0, 3, 2, 0});
    FAIL() << "expected UndefinedMetricError";
  } catch (const UndefinedMetricError& e) {
    EXPECT_EQ(e.metric(), "sensitivity");
  }
}

TEST(Metrics, ReferenceRowsSatisfyBalancedIdentity) {
  const double rows[6][3] = {{65.2, 62.5, 67.9}, {78.9, 79.8, 78.0}, {76.2, 75.0, 77.4},
                             {61.3, 61.9, 60.7}, {77.7, 77.4, 78.0}, {79.5, 80.4, 78.6}};
  for (const auto& r : rows) {
    MetricsReport m;
    m.accuracy = r[0] / 100.0;
    m.sensitivity = r[1] / 100.0;
    m.specificity = r[2] / 100.0;
    m.counts = {84, 84, 84, 84};
    EXPECT_LE(100.0 * consistency_residual(m) / 336.0, 0.1) << r[0];
  }
}

TEST(Metrics, ConsistencyHoldsForRandomCounts) {
  nn::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    ConfusionMatrix cm;
    cm.tp = static_cast<std::size_t>(rng.uniform_int(0, 50));
    cm.fn = static_cast<std::size_t>(rng.uniform_int(cm.tp == 0 ? 1 : 0, 50));
    cm.tn = static_cast<std::size_t>(rng.uniform_int(0, 50));
    cm.fp = static_cast<std::size_t>(rng.uniform_int(cm.tn == 0 ? 1 : 0, 50));
    EXPECT_LT(consistency_residual(metrics(cm)), 1e-9);
  }
}

nn::Tensor mask_of(std::initializer_list<float> v) { return nn::Tensor({v.size()}, std::vector<float>(v)); }

TEST(Dice, IdenticalMasks) {
  const nn::Tensor m = mask_of({1, 0, 1, 1, 0});
  const DiceResult d = dice_pixel_metrics(m, m);
  EXPECT_EQ(d.dice, 1.0);
  EXPECT_EQ(d.sensitivity, 1.0);
  EXPECT_EQ(d.specificity, 1.0);
  EXPECT_FALSE(d.empty_ground_truth);
}

TEST(Dice, DisjointMasks) { EXPECT_EQ(dice_pixel_metrics(mask_of({1, 1, 0, 0}), mask_of({0, 0, 1, 1})).dice, 0.0); }

TEST(Dice, HalfCoverage) {
  const DiceResult d = dice_pixel_metrics(mask_of({1, 1, 0, 0, 0, 0}), mask_of({1, 1, 1, 1, 0, 0}));
  EXPECT_NEAR(d.dice, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(d.sensitivity, 0.5, 1e-12);
  EXPECT_EQ(d.specificity, 1.0);
}

TEST(Dice, ThresholdIsInclusive) {
  const PixelCounts c = pixel_counts(mask_of({0.5f, 0.49f}), mask_of({0.5f, 0.0f}));
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.tn, 1u);
}

TEST(Dice, EmptyGroundTruthFlagged) {
  const DiceResult both = dice_pixel_metrics(mask_of({0, 0}), mask_of({0, 0}));
  EXPECT_TRUE(both.empty_ground_truth);
  EXPECT_EQ(both.dice, 1.0);
  const DiceResult spurious = dice_pixel_metrics(mask_of({1, 0}), mask_of({0, 0}));
  EXPECT_TRUE(spurious.empty_ground_truth);
  EXPECT_EQ(spurious.dice, 0.0);
}

TEST(Dice, ShapeMismatchThrows) { EXPECT_THROW(pixel_counts(mask_of({1, 0}), mask_of({1, 0, 0})), ShapeError); }

TEST(Dice, PooledCountsAdd) {
  PixelCounts a = pixel_counts(mask_of({1, 0}), mask_of({1, 1}));
  a += pixel_counts(mask_of({1, 1}), mask_of({1, 1}));
  EXPECT_EQ(a.tp, 3u);
  EXPECT_EQ(a.fn, 1u);
  EXPECT_NEAR(dice_from_counts(a).dice, 6.0 / 7.0, 1e-12);
}

std::vector<std::size_t> sizes_of(const TercileSplit& s) { return {s.sizes[0], s.sizes[1], s.sizes[2]}; }

TEST(Tercile, ExactThirds) {
  const std::vector<double> v{9, 1, 5, 3, 7, 2, 8, 4, 6};
  const TercileSplit s = tercile_split(v);
  EXPECT_EQ(sizes_of(s), (std::vector<std::size_t>{3, 3, 3}));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(s.group[i], static_cast<int>((v[i] - 1) / 3) + 1) << v[i];
  EXPECT_EQ(s.cut1, 3.0);
  EXPECT_EQ(s.cut2, 6.0);
}

TEST(Tercile, TenValues) {
  std::vector<double> v(10);
  for (std::size_t i = 0; i < 10; ++i) v[i] = static_cast<double>(i);
  EXPECT_EQ(sizes_of(tercile_split(v)), (std::vector<std::size_t>{4, 3, 3}));
}

TEST(Tercile, ReferenceGroupSizesAsMultiset) {
  std::vector<double> v(163);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>((i * 37) % 163);
  auto sizes = sizes_of(tercile_split(v));
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{54, 54, 55}));
}

TEST(Tercile, BalancedForEveryN) {
  for (std::size_t n = 3; n < 60; ++n) {
    std::vector<double> v(n, 1.0);
    const auto sizes = sizes_of(tercile_split(v));
    EXPECT_EQ(sizes[0] + sizes[1] + sizes[2], n);
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
  }
}

TEST(Tercile, TooFewValuesThrow) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(tercile_split(v), ValidationError);
}

data::CccAnnotation ann(const std::string& id, int rentrop, int flow, double size) {
  data::CccAnnotation a;
  a.patient_id = id;
  a.ica_id = id;
  a.rentrop_grade = rentrop;
  a.flow_grade = flow;
  a.collateral_size_px = size;
  return a;
}

TEST(Subgroups, HandCountedFixture) {
  std::map<std::string, data::CccAnnotation> anns;
  std::vector<PositiveCase> cases;
  const struct {
    const char* id;
    int rentrop, flow;
    double size, prob;
  } rows[] = {{"a", 1, 1, 1.0, 0.9}, {"b", 1, 2, 2.0, 0.2}, {"c", 2, 2, 3.0, 0.8}, {"d", 2, 3, 4.0, 0.7},
              {"e", 2, 4, 5.0, 0.1}, {"f", 3, 4, 6.0, 0.6}, {"g", 0, 1, 7.0, 0.9}};
  for (const auto& r : rows) {
    anns[r.id] = ann(r.id, r.rentrop, r.flow, r.size);
    cases.push_back({r.id, r.prob});
  }
  cases.push_back({"unannotated", 0.9});

  const SubgroupReport rentrop = subgroup_sensitivity(cases, anns, Grouping::rentrop);
  ASSERT_EQ(rentrop.groups.size(), 3u);
  EXPECT_EQ(rentrop.groups[0].n, 2u);
  EXPECT_EQ(rentrop.groups[0].tp, 1u);
  EXPECT_DOUBLE_EQ(*rentrop.groups[0].sensitivity, 0.5);
  EXPECT_EQ(rentrop.groups[1].n, 3u);
  EXPECT_DOUBLE_EQ(*rentrop.groups[1].sensitivity, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*rentrop.groups[2].sensitivity, 1.0);
  ASSERT_EQ(rentrop.exclusions.size(), 2u);

  const SubgroupReport flow = subgroup_sensitivity(cases, anns, Grouping::flow_grade);
  ASSERT_EQ(flow.groups.size(), 4u);
  EXPECT_EQ(flow.groups[0].n, 2u);
  EXPECT_DOUBLE_EQ(*flow.groups[0].sensitivity, 1.0);
  EXPECT_DOUBLE_EQ(*flow.groups[1].sensitivity, 0.5);
  EXPECT_DOUBLE_EQ(*flow.groups[2].sensitivity, 1.0);
  EXPECT_DOUBLE_EQ(*flow.groups[3].sensitivity, 0.5);
  EXPECT_EQ(flow.exclusions.size(), 1u);

  const SubgroupReport size = subgroup_sensitivity(cases, anns, Grouping::size_tercile);
  ASSERT_TRUE(size.cuts.has_value());
  EXPECT_EQ(size.cuts->first, 3.0);
  EXPECT_EQ(size.cuts->second, 5.0);
  EXPECT_EQ(size.groups[0].n, 3u);
  EXPECT_EQ(size.groups[0].tp, 2u);
  EXPECT_EQ(size.groups[1].n, 2u);
  EXPECT_EQ(size.groups[1].tp, 1u);
  EXPECT_EQ(size.groups[2].n, 2u);
  EXPECT_EQ(size.groups[2].tp, 2u);
}

TEST(Subgroups, PerfectGroupAndEmptyGroup) {
  std::map<std::string, data::CccAnnotation> anns{{"x", ann("x", 3, 1, 1.0)}, {"y", ann("y", 3, 1, 2.0)}};
  const std::vector<PositiveCase> cases{{"x", 0.9}, {"y", 0.51}};
  const SubgroupReport r = subgroup_sensitivity(cases, anns, Grouping::rentrop);
  EXPECT_DOUBLE_EQ(*r.groups[2].sensitivity, 1.0);
  EXPECT_FALSE(r.groups[0].sensitivity.has_value());
  EXPECT_TRUE(r.exclusions.empty());
}

TEST(Subgroups, GroupingNames) {
  for (const auto g : {Grouping::rentrop, Grouping::flow_grade, Grouping::size_tercile}) EXPECT_EQ(parse_grouping(to_string(g)), g);
  EXPECT_THROW(parse_grouping("blush"), ConfigError);
}

ReportBundle six_row_bundle() {
  ReportBundle b;
  const MetricsReport reference[6] = {metrics({105, 54, 114, 63}), metrics({134, 37, 131, 34}), metrics({126, 38, 130, 42}),
                                      metrics({104, 66, 102, 64}), metrics({130, 37, 131, 38}), metrics({135, 36, 132, 33})};
  int i = 0;
  for (const char* model : {"Classic", "FSL"}) {
    for (const auto& [pre, frz] : {std::pair{false, false}, std::pair{true, false}, std::pair{true, true}}) {
      b.configurations.push_back({model, pre, frz, static_cast<std::size_t>(10 + i), reference[i]});
      ++i;
    }
  }
  std::map<std::string, data::CccAnnotation> anns{{"x", ann("x", 2, 1, 1.0)}, {"y", ann("y", 3, 4, 2.0)}, {"z", ann("z", 3, 2, 3.0)}};
  const std::vector<PositiveCase> cases{{"x", 0.9}, {"y", 0.3}, {"z", 0.6}};
  for (const auto g : {Grouping::rentrop, Grouping::flow_grade, Grouping::size_tercile}) {
    b.subgroups.push_back(subgroup_sensitivity(cases, anns, g));
  }
  return b;
}

TEST(Report, SixRowTableLayout) {
  test::TempDir dir("report");
  emit_report(six_row_bundle(), dir.path());
  const std::string table = test::read_text(dir / "tables.csv");
  EXPECT_EQ(table,
            "Model,Pretrain,Freeze,Acc,Sens,Spec\n"
            "Classic,no,no,65.2,62.5,67.9\n"
            "Classic,yes,no,78.9,79.8,78.0\n"
            "Classic,yes,yes,76.2,75.0,77.4\n"
            "FSL,no,no,61.3,61.9,60.7\n"
            "FSL,yes,no,77.7,77.4,78.0\n"
            "FSL,yes,yes,79.5,80.4,78.6\n");
  const std::string rentrop = test::read_text(dir / "subgroup_rentrop.csv");
  EXPECT_EQ(rentrop, "Group,Samples,TP,FN,Sens\n1,0,0,0,\n2,1,1,0,100.0\n3,2,1,1,50.0\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "subgroup_flow_grade.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "subgroup_size_tercile.csv"));
}

TEST(Report, ReemissionIsByteIdentical) {
  test::TempDir a("report_a"), b("report_b");
  emit_report(six_row_bundle(), a.path());
  emit_report(six_row_bundle(), b.path());
  for (const char* f : {"metrics.json", "tables.csv", "subgroup_rentrop.csv", "subgroup_size_tercile.csv"}) {
    EXPECT_EQ(test::read_text(a / f), test::read_text(b / f)) << f;
  }
}

TEST(Report, MetricsJsonRoundTrip) {
  test::TempDir dir("report_rt");
  const ReportBundle bundle = six_row_bundle();
  emit_report(bundle, dir.path());
  EXPECT_EQ(parse_metrics_file(dir / "metrics.json"), bundle.configurations);
}

TEST(Report, RejectsForeignDocuments) {
  EXPECT_THROW(configurations_from_json(nlohmann::json{{"format", "other"}}), ValidationError);
  EXPECT_THROW(parse_metrics_file("/nonexistent/metrics.json"), IoError);
}

}  // namespace
}  // namespace ccc::eval
