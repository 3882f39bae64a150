#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "ccc/data/annotation_io.hpp"
#include "ccc/data/clip.hpp"
#include "ccc/data/folds.hpp"
#include "ccc/data/mask.hpp"
#include "ccc/data/png_io.hpp"
#include "ccc/data/sequence_store.hpp"
#include "ccc/data/synth.hpp"
#include "ccc/error.hpp"
#include "ccc/eval/dice.hpp"
#include "support/test_support.hpp"

namespace ccc::data {
namespace {

AngioSequence blank_sequence(std::size_t frames, std::size_t size = 4) {
  AngioSequence seq;
  seq.patient_id = "P1";
  seq.ica_id = "P1_ICA1";
  for (std::size_t i = 0; i < frames; ++i) seq.frames.emplace_back(nn::Shape{size, size}, static_cast<float>(i) / 100.0f);
  return seq;
}

CccAnnotation sample_annotation() {
  CccAnnotation a;
  a.patient_id = "P1";
  a.ica_id = "P1_ICA1";
  a.frame_index = 3;
  a.landmarks = {{1.5, 2.0}, {0.0, 0.0}, {3.0, 3.5}};
  a.rentrop_grade = 2;
  a.pathway = "septal";
  a.flow_grade = 3;
  a.blush_grade = 1;
  a.donor_segment = "LAD-prox";
  a.receiving_segment = "RCA-dist";
  a.collateral_size_px = 2.5;
  return a;
}

std::vector<std::size_t> window(const Clip& clip) { return {clip.selected_indices.begin(), clip.selected_indices.end()}; }

std::vector<std::size_t> iota_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> v(last - first + 1);
  std::iota(v.begin(), v.end(), first);
  return v;
}

TEST(ClipWindow, AnnotatedFrameCentersTheWindow) {
  const AngioSequence seq = blank_sequence(30);
  CccAnnotation ann = sample_annotation();
  ann.frame_index = 10;
  const Clip clip = select_clip_annotated(seq, ann);
  EXPECT_EQ(window(clip), iota_range(5, 15));
  EXPECT_EQ(clip.label, ClipLabel::ccc);
  EXPECT_EQ(clip.frames.shape(), (nn::Shape{11, 4, 4}));
  EXPECT_FLOAT_EQ(clip.frames[0], 0.05f);
}

TEST(ClipWindow, ExactFitUsesWholeSequence) {
  CccAnnotation ann = sample_annotation();
  ann.frame_index = 5;
  EXPECT_EQ(window(select_clip_annotated(blank_sequence(11), ann)), iota_range(0, 10));
}

TEST(ClipWindow, ShiftsAwayFromStart) {
  CccAnnotation ann = sample_annotation();
  ann.frame_index = 2;
  EXPECT_EQ(window(select_clip_annotated(blank_sequence(30), ann)), iota_range(0, 10));
}

TEST(ClipWindow, ShortSequenceThrows) {
  EXPECT_THROW(select_clip_annotated(blank_sequence(10), sample_annotation()), Error);
  const std::vector<double> scores(10, 0.0);
  EXPECT_THROW(select_clip_by_vesselness(blank_sequence(10), scores), Error);
}

TEST(ClipWindow, AnnotationBeyondSequenceThrows) {
  CccAnnotation ann = sample_annotation();
  ann.frame_index = 30;
  EXPECT_THROW(select_clip_annotated(blank_sequence(30), ann), Error);
}

TEST(ClipWindow, VesselnessPeakCentersTheWindow) {
  std::vector<double> scores(30, 0.1);
  scores[15] = 0.9;
  const Clip clip = select_clip_by_vesselness(blank_sequence(30), scores);
  EXPECT_EQ(window(clip), iota_range(10, 20));
  EXPECT_EQ(clip.label, ClipLabel::no_ccc);
}

TEST(ClipWindow, VesselnessTieTakesFirstFrame) {
  const std::vector<double> scores(30, 0.4);
  EXPECT_EQ(window(select_clip_by_vesselness(blank_sequence(30), scores)), iota_range(0, 10));
}

TEST(ClipWindow, VesselnessPeakNearEndShifts) {
  std::vector<double> scores(30, 0.0);
  scores[28] = 1.0;
  EXPECT_EQ(window(select_clip_by_vesselness(blank_sequence(30), scores)), iota_range(19, 29));
}

TEST(ClipWindow, ScoreCountMustMatchFrames) {
  const std::vector<double> scores(29, 0.0);
  EXPECT_THROW(select_clip_by_vesselness(blank_sequence(30), scores), Error);
}

TEST(ZScore, HandValues) {
  nn::Tensor t({3}, std::vector<float>{1, 2, 3});
  zscore_inplace(t);
  EXPECT_NEAR(t[0], -1.2247449, 1e-5);
  EXPECT_NEAR(t[1], 0.0, 1e-6);
  EXPECT_NEAR(t[2], 1.2247449, 1e-5);
}

TEST(ZScore, ConstantBecomesZero) {
  Clip clip;
  clip.frames = nn::Tensor({11, 2, 2}, 0.7f);
  const Clip out = zscore_normalize(clip);
  for (const float v : out.frames.values()) EXPECT_EQ(v, 0.0f);
}

TEST(ZScore, NormalizedInputIsFixedPoint) {
  nn::Tensor t({4}, std::vector<float>{-1, 1, -1, 1});
  const nn::Tensor before = t;
  zscore_inplace(t);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t[i], before[i], 1e-6);
}

TEST(GaussianMask, OnCenterlineIsOne) {
  CenterlineSet set;
  set.polylines.push_back({{2.0, 3.0, 0.5}, {6.0, 3.0, 0.5}});
  const nn::Tensor m = gaussian_mask(set, 8, 8);
  EXPECT_FLOAT_EQ(m[3 * 8 + 4], 1.0f);
}

TEST(GaussianMask, OneSigmaBeyondRadius) {
  CenterlineSet set;
  set.polylines.push_back({{2.0, 0.0, 1.0}, {2.0, 10.0, 1.0}});
  // Column 4 lies 2 px from the line; with r = 1 the excess is 1 px. Use
  // sigma = 1 so the excess equals one sigma.
  MaskConfig cfg;
  cfg.sigma_px = 1.0;
  const nn::Tensor m = gaussian_mask(set, 10, 8, cfg);
  EXPECT_NEAR(m[5 * 8 + 4], std::exp(-0.5), 1e-5);
}

TEST(GaussianMask, DefaultSigmaAtRadiusPlusSigma) {
  CenterlineSet set;
  set.polylines.push_back({{0.0, 0.0, 1.25}, {0.0, 20.0, 1.25}});
  // Column 2 is 2 px from x = 0, i.e. r + 0.75.
  const nn::Tensor m = gaussian_mask(set, 20, 4);
  EXPECT_NEAR(m[10 * 4 + 2], 0.6065306597, 1e-5);
}

TEST(GaussianMask, EmptySetIsZero) {
  const nn::Tensor m = gaussian_mask(CenterlineSet{}, 5, 6);
  EXPECT_EQ(m.shape(), (nn::Shape{5, 6}));
  for (const float v : m.values()) EXPECT_EQ(v, 0.0f);
}

TEST(CenterlineSet, InvalidPolylineRejected) {
  CenterlineSet set;
  set.polylines.push_back({{0.0, 0.0, 1.0}});
  EXPECT_THROW(set.validate(), ValidationError);
  set.polylines[0].push_back({1.0, 1.0, 0.0});
  EXPECT_THROW(set.validate(), ValidationError);
  set.polylines[0].back().radius = 0.5;
  EXPECT_NO_THROW(set.validate());
}

TEST(Densify, SpacingBoundAndEndpoints) {
  const Polyline line{{0.0, 0.0, 1.0}, {3.0, 4.0, 2.0}};
  const Polyline d = densify(line, 0.5);
  ASSERT_GE(d.size(), 11u);
  EXPECT_EQ(d.front(), line.front());
  EXPECT_EQ(d.back(), line.back());
  for (std::size_t i = 1; i < d.size(); ++i) {
    EXPECT_LE(std::hypot(d[i].x - d[i - 1].x, d[i].y - d[i - 1].y), 0.5 + 1e-9);
    EXPECT_GE(d[i].radius, 1.0);
    EXPECT_LE(d[i].radius, 2.0);
  }
}

std::vector<PatientRecord> patients(std::size_t n) {
  std::vector<PatientRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"P" + std::to_string(i), 1});
  return out;
}

TEST(Folds, EvenDivision) {
  const FoldAssignment f = patient_kfold(patients(8), 4, 1);
  EXPECT_EQ(f.fold_sizes(), (std::vector<std::size_t>{2, 2, 2, 2}));
}

TEST(Folds, RoundRobinRemainder) {
  EXPECT_EQ(patient_kfold(patients(9), 4, 5).fold_sizes(), (std::vector<std::size_t>{3, 2, 2, 2}));
}

TEST(Folds, TooFewPatientsThrows) {
  EXPECT_THROW(patient_kfold(patients(3), 4, 0), Error);
  EXPECT_THROW(patient_kfold(patients(8), 1, 0), Error);
}

TEST(Folds, DuplicatePatientsThrow) {
  auto p = patients(5);
  p.push_back(p[0]);
  EXPECT_THROW(patient_kfold(p, 4, 0), Error);
}

TEST(Folds, SeedDeterminesAssignment) {
  const auto p = patients(20);
  EXPECT_EQ(patient_kfold(p, 4, 9).fold_of, patient_kfold(p, 4, 9).fold_of);
  bool differs = false;
  for (std::uint64_t s = 1; s < 5 && !differs; ++s) differs = patient_kfold(p, 4, 0).fold_of != patient_kfold(p, 4, s).fold_of;
  EXPECT_TRUE(differs);
}

TEST(Folds, UnknownPatientThrows) {
  const FoldAssignment f = patient_kfold(patients(4), 4, 0);
  EXPECT_THROW(f.fold("nobody"), Error);
}

TEST(Synth, ExactClassCounts) {
  SynthConfig cfg;
  cfg.n_sequences = 20;
  cfg.image_size = 32;
  cfg.frames_per_sequence = 11;
  cfg.seed = 4;
  const SynthDataset ds = synth_generate(cfg);
  ASSERT_EQ(ds.samples.size(), 20u);
  EXPECT_EQ(ds.positives(), 10u);
  for (const auto& s : ds.samples) {
    EXPECT_EQ(s.sequence.frame_count(), 11u);
    EXPECT_EQ(s.centerlines.size(), 11u);
    if (s.annotation) {
      EXPECT_NO_THROW(validate_annotation(*s.annotation, SequenceExtent{11, 32, 32}));
      EXPECT_EQ(s.annotation->ica_id, s.sequence.ica_id);
    }
  }
}

TEST(Synth, SameSeedGivesByteIdenticalFiles) {
  SynthConfig cfg;
  cfg.n_sequences = 4;
  cfg.image_size = 32;
  cfg.frames_per_sequence = 11;
  cfg.seed = 12;
  test::TempDir a("synth_a"), b("synth_b");
  write_synth_dataset(synth_generate(cfg), a.path());
  write_synth_dataset(synth_generate(cfg), b.path());
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    EXPECT_EQ(test::read_text(entry.path()), test::read_text(b.path() / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 4u * 11u);
}

TEST(Synth, DifferentSeedsDiffer) {
  SynthConfig cfg;
  cfg.n_sequences = 2;
  cfg.image_size = 32;
  cfg.frames_per_sequence = 11;
  cfg.seed = 1;
  const auto a = synth_generate(cfg);
  cfg.seed = 2;
  const auto b = synth_generate(cfg);
  EXPECT_FALSE(a.samples[0].sequence.frames[5].bitwise_equal(b.samples[0].sequence.frames[5]));
}

TEST(Synth, RenderedVesselsAgreeWithAnalyticMask) {
  SynthConfig cfg;
  cfg.n_sequences = 6;
  cfg.seed = 3;
  const SynthDataset ds = synth_generate(cfg);
  std::size_t checked = 0;
  for (const auto& s : ds.samples) {
    for (std::size_t f = 0; f < s.sequence.frame_count(); ++f) {
      const nn::Tensor mask = gaussian_mask(s.centerlines[f], cfg.image_size, cfg.image_size);
      const eval::DiceResult d = eval::dice_pixel_metrics(s.vessel_opacity[f], mask);
      if (d.empty_ground_truth) continue;
      EXPECT_GT(d.dice, 0.9) << s.sequence.ica_id << " frame " << f;
      ++checked;
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(Synth, PositivesFillLaterThanNegativesAreEmptyAtStart) {
  SynthConfig cfg;
  cfg.n_sequences = 4;
  cfg.seed = 8;
  const SynthDataset ds = synth_generate(cfg);
  for (const auto& s : ds.samples) {
    double first = 0.0, mid = 0.0;
    for (const float v : s.vessel_opacity.front().values()) first += v;
    for (const float v : s.vessel_opacity[6].values()) mid += v;
    EXPECT_LT(first, mid) << s.sequence.ica_id;
  }
}

TEST(Synth, InvalidConfigThrows) {
  SynthConfig cfg;
  cfg.n_sequences = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.positive_ratio = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.frames_per_sequence = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.collateral_radius_min = 2.0;
  cfg.collateral_radius_max = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Synth, HardPresetIsHarder) {
  const SynthConfig base, hard = SynthConfig::hard(5);
  EXPECT_GT(hard.noise_std, base.noise_std);
  EXPECT_LT(hard.collateral_radius_max, base.collateral_radius_min);
  EXPECT_EQ(hard.seed, 5u);
  EXPECT_EQ(SynthConfig::from_json(hard.to_json()).to_json(), hard.to_json());
}

TEST(Synth, MultipleIcasPerPatientShareIds) {
  SynthConfig cfg;
  cfg.n_sequences = 6;
  cfg.icas_per_patient = 3;
  cfg.image_size = 32;
  cfg.frames_per_sequence = 11;
  const SynthDataset ds = synth_generate(cfg);
  std::map<std::string, int> per_patient;
  for (const auto& s : ds.samples) per_patient[s.sequence.patient_id]++;
  EXPECT_EQ(per_patient.size(), 2u);
  for (const auto& [p, n] : per_patient) EXPECT_EQ(n, 3);
}

TEST(AnnotationIo, WriteReadRoundTrip) {
  test::TempDir dir("ann");
  std::vector<CccAnnotation> list{sample_annotation(), sample_annotation()};
  list[1].ica_id = "P1_ICA2";
  list[1].rentrop_grade = 0;
  list[1].blush_grade = 3;
  write_annotation_file(list, dir / "a.json");
  EXPECT_EQ(parse_annotation_file(dir / "a.json"), list);
}

TEST(AnnotationIo, FlowGradeOutOfRangeNamesField) {
  nlohmann::json j = annotation_to_json(sample_annotation());
  j["flow_grade"] = 5;
  try {
    parse_annotations(nlohmann::json::array({annotation_to_json(sample_annotation()), j}).dump());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "flow_grade");
    ASSERT_TRUE(e.record().has_value());
    EXPECT_EQ(*e.record(), 1u);
  }
}

TEST(AnnotationIo, MissingFieldNamesField) {
  nlohmann::json j = annotation_to_json(sample_annotation());
  j.erase("pathway");
  try {
    parse_annotations(nlohmann::json::array({j}).dump());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "pathway");
    EXPECT_EQ(e.record(), std::optional<std::size_t>(0));
  }
}

TEST(AnnotationIo, LandmarkOutsideImageRejectedWithLookup) {
  CccAnnotation a = sample_annotation();
  a.landmarks.receiver = {4.0, 1.0};
  const std::string text = nlohmann::json::array({annotation_to_json(a)}).dump();
  EXPECT_NO_THROW(parse_annotations(text));
  const ExtentLookup lookup = [](const std::string&, const std::string&) {
    return std::optional<SequenceExtent>(SequenceExtent{30, 4, 4});
  };
  try {
    parse_annotations(text, lookup);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "landmarks.receiver");
  }
  const ExtentLookup unknown = [](const std::string&, const std::string&) { return std::optional<SequenceExtent>(); };
  EXPECT_THROW(parse_annotations(text, unknown), ValidationError);
}

TEST(AnnotationIo, RentropFixtureCountsPreserved) {
  const auto list = parse_annotation_file(test::fixture_path("ui_export_annotations.json"));
  std::map<int, int> counts;
  for (const auto& a : list) counts[a.rentrop_grade]++;
  EXPECT_EQ(counts, (std::map<int, int>{{1, 1}, {2, 1}, {3, 2}}));
}

TEST(AnnotationIo, MalformedFilesRejected) {
  EXPECT_THROW(parse_annotations("{\"not\": \"an array\"}"), ValidationError);
  EXPECT_THROW(parse_annotations("[1, 2"), ValidationError);
  nlohmann::json j = annotation_to_json(sample_annotation());
  j["frame_index"] = "three";
  EXPECT_THROW(parse_annotations(nlohmann::json::array({j}).dump()), ValidationError);
  j = annotation_to_json(sample_annotation());
  j["collateral_size_px"] = 0.0;
  EXPECT_THROW(parse_annotations(nlohmann::json::array({j}).dump()), ValidationError);
}

TEST(Centerlines, JsonRoundTrip) {
  CenterlineSet set;
  set.polylines.push_back({{1.0, 2.0, 0.5}, {3.0, 4.0, 0.75}});
  set.polylines.push_back({{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0}, {2.0, 1.0, 1.5}});
  EXPECT_EQ(centerlines_from_json(centerlines_to_json(set)), set);
}

TEST(Png, SixteenBitRoundTripWithinQuantization) {
  test::TempDir dir("png");
  nn::Rng rng(11);
  const nn::Tensor img = test::random_tensor({7, 5}, rng, 0.0, 1.0);
  write_png_gray16(img, dir / "f.png");
  const nn::Tensor back = read_png_gray(dir / "f.png");
  ASSERT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 1.0 / 65535.0);
  EXPECT_THROW(read_png_gray(dir / "missing.png"), Error);
}

TEST(SequenceStore, RoundTripAndOrdering) {
  test::TempDir dir("store");
  AngioSequence b = blank_sequence(11);
  b.patient_id = "P2";
  b.ica_id = "P2_ICA1";
  b.pixel_spacing_mm = 0.3;
  AngioSequence a = blank_sequence(11);
  std::vector<CenterlineSet> lines(11);
  lines[3].polylines.push_back({{0.0, 0.0, 1.0}, {2.0, 2.0, 1.0}});
  write_sequence_dir(b, {}, dir / "zz");
  write_sequence_dir(a, lines, dir / "aa");
  const auto store = read_sequence_store(dir.path());
  ASSERT_EQ(store.size(), 2u);
  EXPECT_EQ(store[0].sequence.patient_id, "P1");
  EXPECT_EQ(store[0].centerlines, lines);
  EXPECT_TRUE(store[1].centerlines.empty());
  EXPECT_EQ(store[1].sequence.pixel_spacing_mm, std::optional<double>(0.3));
  for (std::size_t i = 0; i < 11; ++i) {
    for (std::size_t p = 0; p < 16; ++p) EXPECT_NEAR(store[0].sequence.frames[i][p], a.frames[i][p], 1e-4);
  }
}

TEST(SequenceStore, FrameSizeMismatchNamesFrame) {
  test::TempDir dir("store_bad");
  write_sequence_dir(blank_sequence(11), {}, dir / "s");
  write_png_gray16(nn::Tensor({5, 4}), dir / "s" / "frame_0007.png");
  try {
    read_sequence_dir(dir / "s");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "frame_0007.png");
  }
}

TEST(SequenceStore, MalformedManifestThrows) {
  test::TempDir dir("store_manifest");
  std::filesystem::create_directories(dir / "s");
  {
    std::ofstream(dir / "s" / "manifest.json") << "{\"patient_id\": \"P\"}";
  }
  EXPECT_THROW(read_sequence_dir(dir / "s"), ValidationError);
  EXPECT_THROW(read_sequence_dir(dir / "none"), IoError);
}

TEST(Sequence, ValidateRejectsMixedSizes) {
  AngioSequence seq = blank_sequence(11);
  seq.frames[4] = nn::Tensor({3, 4});
  EXPECT_THROW(seq.validate(), Error);
  seq = blank_sequence(11);
  seq.ica_id.clear();
  EXPECT_THROW(seq.validate(), Error);
}

}  // namespace
}  // namespace ccc::data
