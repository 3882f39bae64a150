#include "ccc/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "ccc/data/annotation_io.hpp"
#include "ccc/data/sequence_store.hpp"
#include "ccc/error.hpp"
#include "ccc/nn/rng.hpp"

namespace ccc::data {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEdgeSigma = 0.75;

struct VesselPoint {
  double x, y, radius;
  double arc;        // path length from the tree root
  double fill_time;  // frame at which contrast reaches the point
};

struct Branch {
  std::vector<VesselPoint> points;
  double junction_arc = 0.0;  // arc of the parent point on the main branch (0 for the main branch)
};

struct Tree {
  std::vector<Branch> branches;  // branches[0] is the main branch
};

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

bool inside(double x, double y, double size) { return x >= 1.0 && y >= 1.0 && x <= size - 2.0 && y <= size - 2.0; }

Branch grow_branch(nn::Rng& rng, double x, double y, double heading, double length, double r0, double r1,
                   double arc0, double size) {
  Branch b;
  b.junction_arc = arc0;
  const auto steps = static_cast<std::size_t>(std::max(2.0, length));
  double curvature = rng.normal(0.0, 0.02);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    b.points.push_back({x, y, r0 + t * (r1 - r0), arc0 + static_cast<double>(i), kInf});
    curvature = 0.9 * curvature + rng.normal(0.0, 0.015);
    heading += curvature;
    x += std::cos(heading);
    y += std::sin(heading);
    if (!inside(x, y, size)) break;
  }
  if (b.points.size() < 2) b.points.push_back({clampd(x, 0, size - 1), clampd(y, 0, size - 1), r1, arc0 + 1.0, kInf});
  return b;
}

Tree grow_tree(nn::Rng& rng, int side, double size) {
  const double along = rng.uniform(0.2, 0.8) * size;
  double x = 0, y = 0;
  switch (side) {
    case 0: x = 1.0; y = along; break;
    case 1: x = size - 2.0; y = along; break;
    case 2: x = along; y = 1.0; break;
    default: x = along; y = size - 2.0; break;
  }
  const double tx = size * rng.uniform(0.35, 0.65), ty = size * rng.uniform(0.35, 0.65);
  const double heading = std::atan2(ty - y, tx - x) + rng.normal(0.0, 0.2);
  Tree tree;
  const double r0 = rng.uniform(1.6, 2.2), r1 = rng.uniform(0.9, 1.2);
  tree.branches.push_back(grow_branch(rng, x, y, heading, rng.uniform(0.55, 0.85) * size, r0, r1, 0.0, size));
  const auto n_side = rng.uniform_int(1, 3);
  for (std::int64_t s = 0; s < n_side; ++s) {
    const auto& main = tree.branches.front().points;
    if (main.size() < 8) break;
    const auto at = static_cast<std::size_t>(rng.uniform(0.25, 0.75) * static_cast<double>(main.size() - 1));
    const auto& j = main[at];
    const auto& j1 = main[std::min(at + 1, main.size() - 1)];
    const double main_heading = std::atan2(j1.y - j.y, j1.x - j.x);
    const double turn = rng.uniform(0.5, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    tree.branches.push_back(grow_branch(rng, j.x, j.y, main_heading + turn, rng.uniform(0.25, 0.45) * size,
                                        0.75 * j.radius, 0.7, j.arc, size));
  }
  return tree;
}

Branch grow_bridge(nn::Rng& rng, const VesselPoint& a, const VesselPoint& b, double radius) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double dist = std::hypot(dx, dy);
  const double nx = -dy / dist, ny = dx / dist;
  const double bend = rng.uniform(-0.3, 0.3) * dist;
  const double cx = 0.5 * (a.x + b.x) + nx * bend, cy = 0.5 * (a.y + b.y) + ny * bend;
  const double wiggle = rng.uniform(0.5, 1.2), freq = rng.uniform(2.0, 4.0);
  // Dense samples of a wiggled quadratic Bezier, then resampled at ~1 px.
  std::vector<std::pair<double, double>> dense;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double u = 1.0 - t;
    const double w = wiggle * std::sin(freq * std::numbers::pi * t) * std::sin(std::numbers::pi * t);
    dense.emplace_back(u * u * a.x + 2 * u * t * cx + t * t * b.x + nx * w, u * u * a.y + 2 * u * t * cy + t * t * b.y + ny * w);
  }
  Branch bridge;
  double acc = 0.0, next = 0.0;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (i > 0) acc += std::hypot(dense[i].first - dense[i - 1].first, dense[i].second - dense[i - 1].second);
    if (acc >= next || i + 1 == dense.size()) {
      bridge.points.push_back({dense[i].first, dense[i].second, radius, acc, kInf});
      next += 1.0;
    }
  }
  return bridge;
}

// Exact distance-to-segment tube renderer, independent of the mask code path.
void render_segment(nn::Tensor& layer, const VesselPoint& a, const VesselPoint& b) {
  const double reach = 6.0 * kEdgeSigma + std::max(a.radius, b.radius);
  const auto h = static_cast<long>(layer.dim(0)), w = static_cast<long>(layer.dim(1));
  const long x0 = std::max(0L, static_cast<long>(std::floor(std::min(a.x, b.x) - reach)));
  const long x1 = std::min(w - 1, static_cast<long>(std::ceil(std::max(a.x, b.x) + reach)));
  const long y0 = std::max(0L, static_cast<long>(std::floor(std::min(a.y, b.y) - reach)));
  const long y1 = std::min(h - 1, static_cast<long>(std::ceil(std::max(a.y, b.y) + reach)));
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      double t = len2 > 0 ? ((x - a.x) * ex + (y - a.y) * ey) / len2 : 0.0;
      t = clampd(t, 0.0, 1.0);
      const double d = std::hypot(x - (a.x + t * ex), y - (a.y + t * ey));
      const double beyond = std::max(0.0, d - (a.radius + t * (b.radius - a.radius)));
      const auto v = static_cast<float>(std::exp(-beyond * beyond / (2.0 * kEdgeSigma * kEdgeSigma)));
      float& o = layer.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
      o = std::max(o, v);
    }
  }
}

void emit_filled(const Branch& branch, double frame, CenterlineSet& out, nn::Tensor& layer) {
  Polyline run;
  auto flush = [&] {
    if (run.size() >= 2) out.polylines.push_back(run);
    run.clear();
  };
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const auto& p = branch.points[i];
    if (p.fill_time <= frame) {
      run.push_back({p.x, p.y, p.radius});
      if (i > 0 && branch.points[i - 1].fill_time <= frame) render_segment(layer, branch.points[i - 1], p);
    } else {
      flush();
    }
  }
  flush();
}

const std::vector<std::string> kPathways = {"septal", "epicardial", "atrial", "bridging"};
const std::vector<std::string> kSegments = {"RCA-prox", "RCA-mid", "RCA-dist", "LAD-prox", "LAD-mid",
                                            "LAD-dist", "LCX-prox", "LCX-mid", "LCX-dist"};

SynthSample generate_one(const SynthConfig& cfg, std::size_t index, bool positive) {
  nn::Rng rng(nn::derive_seed(cfg.seed, index));
  const double size = static_cast<double>(cfg.image_size);
  const double scale = size / 64.0;
  const std::size_t frames = cfg.frames_per_sequence;

  const int donor_side = static_cast<int>(rng.uniform_int(0, 3));
  const int receiver_side = donor_side ^ 1;  // opposite border
  Tree donor = grow_tree(rng, donor_side, size);
  Tree receiver = grow_tree(rng, receiver_side, size);

  const double speed = rng.uniform(14.0, 20.0) * scale;
  const double donor_t0 = rng.uniform(0.0, 1.5);
  const double receiver_t0 = rng.uniform(0.0, 1.5);
  for (auto& br : donor.branches) {
    for (auto& p : br.points) p.fill_time = donor_t0 + p.arc / speed;
  }

  SynthSample sample;
  const std::size_t patient = index / cfg.icas_per_patient;
  sample.sequence.patient_id = fmt::format("P{:04d}", patient);
  sample.sequence.ica_id = fmt::format("P{:04d}_ICA{}", patient, index % cfg.icas_per_patient + 1);

  std::vector<Branch> extra;
  if (!positive) {
    for (auto& br : receiver.branches) {
      for (auto& p : br.points) p.fill_time = receiver_t0 + p.arc / speed;
    }
  } else {
    const auto& dmain = donor.branches.front().points;
    const auto& rmain = receiver.branches.front().points;
    const auto d_at = static_cast<std::size_t>(rng.uniform(0.6, 0.9) * static_cast<double>(dmain.size() - 1));
    const auto r_at = static_cast<std::size_t>(rng.uniform(0.6, 0.9) * static_cast<double>(rmain.size() - 1));
    const VesselPoint& da = dmain[d_at];
    const VesselPoint& ra = rmain[r_at];

    const int flow = static_cast<int>(rng.uniform_int(kFlowMin, kFlowMax));
    const int rentrop = static_cast<int>(rng.uniform_int(1, kRentropMax));
    const double size_t01 = clampd((flow - 1) / 3.0 + rng.uniform(-0.15, 0.15), 0.0, 1.0);
    const double c_radius = cfg.collateral_radius_min + size_t01 * (cfg.collateral_radius_max - cfg.collateral_radius_min);

    Branch bridge = grow_bridge(rng, da, ra, c_radius);
    const double c_speed = rng.uniform(4.0, 6.0) * scale;
    for (auto& p : bridge.points) p.fill_time = da.fill_time + p.arc / c_speed;
    const double bridge_len = bridge.points.back().arc;
    const double bridge_done = bridge.points.back().fill_time;

    // Occluded receiver: a short proximal stump fills antegrade, the rest
    // retrogradely from the bridge, up to a Rentrop-dependent extent.
    const double stump = rng.uniform(0.1, 0.2) * rmain.back().arc;
    const double retro_speed = rng.uniform(6.0, 9.0) * scale;
    double max_geo = 0.0;
    auto geodesic = [&](const Branch& br, const VesselPoint& p) {
      return &br == &receiver.branches.front()
                 ? std::abs(p.arc - ra.arc)
                 : std::abs(br.junction_arc - ra.arc) + (p.arc - br.junction_arc);
    };
    for (const auto& br : receiver.branches) {
      for (const auto& p : br.points) max_geo = std::max(max_geo, geodesic(br, p));
    }
    const double extent = (rentrop == 3 ? 1.0 : rentrop == 2 ? 0.6 : 0.25) * max_geo;
    for (auto& br : receiver.branches) {
      for (auto& p : br.points) {
        const double antegrade = p.arc <= stump ? receiver_t0 + p.arc / speed : kInf;
        const double g = geodesic(br, p);
        const double retro = g <= extent ? bridge_done + g / retro_speed : kInf;
        p.fill_time = std::min(antegrade, retro);
      }
    }

    CccAnnotation ann;
    ann.patient_id = sample.sequence.patient_id;
    ann.ica_id = sample.sequence.ica_id;
    const double mid_time = da.fill_time + 0.5 * bridge_len / c_speed;
    ann.frame_index = static_cast<int>(clampd(std::round(mid_time), 0.0, static_cast<double>(frames - 1)));
    const auto& mid = bridge.points[bridge.points.size() / 2];
    auto clamp_pt = [&](double x, double y) { return Point2{clampd(x, 0.0, size - 1.0), clampd(y, 0.0, size - 1.0)}; };
    ann.landmarks.collateral = clamp_pt(mid.x, mid.y);
    ann.landmarks.donor = clamp_pt(da.x, da.y);
    ann.landmarks.receiver = clamp_pt(ra.x, ra.y);
    ann.rentrop_grade = rentrop;
    ann.flow_grade = flow;
    ann.blush_grade = static_cast<int>(rng.uniform_int(kBlushMin, kBlushMax));
    ann.pathway = kPathways[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kPathways.size()) - 1))];
    const auto d_seg = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kSegments.size()) - 1));
    auto r_seg = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kSegments.size()) - 2));
    if (r_seg >= d_seg) ++r_seg;
    ann.donor_segment = kSegments[d_seg];
    ann.receiving_segment = kSegments[r_seg];
    ann.collateral_size_px = std::round(2.0 * c_radius * 100.0) / 100.0;
    sample.annotation = ann;
    extra.push_back(std::move(bridge));
  }

  // Static background: bright base with a few smooth blobs.
  nn::Tensor background({cfg.image_size, cfg.image_size}, static_cast<float>(rng.uniform(0.7, 0.85)));
  for (int b = 0; b < 3; ++b) {
    const double bx = rng.uniform(0.0, size), by = rng.uniform(0.0, size);
    const double amp = rng.uniform(-0.1, 0.1), s = rng.uniform(0.2, 0.5) * size;
    for (std::size_t y = 0; y < cfg.image_size; ++y) {
      for (std::size_t x = 0; x < cfg.image_size; ++x) {
        const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
        background.at(y, x) += static_cast<float>(amp * std::exp(-d2 / (2 * s * s)));
      }
    }
  }
  const double contrast = rng.uniform(0.35, 0.5);

  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f);
    CenterlineSet lines;
    nn::Tensor layer({cfg.image_size, cfg.image_size});
    for (const Tree* tree : {&donor, &receiver}) {
      for (const auto& br : tree->branches) emit_filled(br, t, lines, layer);
    }
    for (const auto& br : extra) emit_filled(br, t, lines, layer);

    const double washout = std::max(0.6, 1.0 - 0.03 * std::max(0.0, t - 10.0));
    const double amplitude = contrast * washout * rng.uniform(0.97, 1.03);
    nn::Tensor frame({cfg.image_size, cfg.image_size});
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double v = background[i] * (1.0 - amplitude * layer[i]) + rng.normal(0.0, cfg.noise_std);
      frame[i] = static_cast<float>(clampd(v, 0.0, 1.0));
    }
    sample.sequence.frames.push_back(std::move(frame));
    sample.centerlines.push_back(std::move(lines));
    sample.vessel_opacity.push_back(std::move(layer));
  }
  return sample;
}

}  // namespace

SynthConfig SynthConfig::hard(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.noise_std = 0.07;
  cfg.collateral_radius_min = 0.5;
  cfg.collateral_radius_max = 0.75;
  return cfg;
}

void SynthConfig::validate() const {
  if (n_sequences < 1) throw ConfigError("n_sequences", "n_sequences must be >= 1");
  if (!(positive_ratio >= 0.0 && positive_ratio <= 1.0)) throw ConfigError("positive_ratio", "positive_ratio must be in [0,1]");
  if (image_size < 32) throw ConfigError("image_size", fmt::format("image_size must be >= 32, got {}", image_size));
  if (frames_per_sequence < 11) {
    throw ConfigError("frames_per_sequence", fmt::format("frames_per_sequence must be >= 11, got {}", frames_per_sequence));
  }
  if (icas_per_patient < 1) throw ConfigError("icas_per_patient", "icas_per_patient must be >= 1");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std", "noise_std must be >= 0");
  if (!(collateral_radius_min > 0.0 && collateral_radius_max >= collateral_radius_min)) {
    throw ConfigError("collateral_radius_min", "collateral radius range must be positive and ordered");
  }
}

nlohmann::json SynthConfig::to_json() const {
  return {{"n_sequences", n_sequences},
          {"positive_ratio", positive_ratio},
          {"image_size", image_size},
          {"frames_per_sequence", frames_per_sequence},
          {"seed", seed},
          {"icas_per_patient", icas_per_patient},
          {"noise_std", noise_std},
          {"collateral_radius_min", collateral_radius_min},
          {"collateral_radius_max", collateral_radius_max}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_sequences = j.value("n_sequences", c.n_sequences);
  c.positive_ratio = j.value("positive_ratio", c.positive_ratio);
  c.image_size = j.value("image_size", c.image_size);
  c.frames_per_sequence = j.value("frames_per_sequence", c.frames_per_sequence);
  c.seed = j.value("seed", c.seed);
  c.icas_per_patient = j.value("icas_per_patient", c.icas_per_patient);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.collateral_radius_min = j.value("collateral_radius_min", c.collateral_radius_min);
  c.collateral_radius_max = j.value("collateral_radius_max", c.collateral_radius_max);
  return c;
}

std::size_t SynthDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const SynthSample& s) { return s.annotation.has_value(); }));
}

SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.n_sequences) * cfg.positive_ratio));
  std::vector<char> labels(cfg.n_sequences, 0);
  std::fill_n(labels.begin(), n_pos, 1);
  nn::Rng rng(nn::derive_seed(cfg.seed, "labels"));
  rng.shuffle(labels);
  SynthDataset out;
  out.config = cfg;
  out.samples.reserve(cfg.n_sequences);
  for (std::size_t i = 0; i < cfg.n_sequences; ++i) out.samples.push_back(generate_one(cfg, i, labels[i] != 0));
  return out;
}

void write_synth_dataset(const SynthDataset& dataset, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  std::vector<CccAnnotation> annotations;
  for (const auto& s : dataset.samples) {
    write_sequence_dir(s.sequence, s.centerlines, root / s.sequence.ica_id);
    if (s.annotation) annotations.push_back(*s.annotation);
  }
  write_annotation_file(annotations, root / "annotations.json");
  std::ofstream cfg(root / "synth_config.json", std::ios::trunc);
  if (!cfg) throw IoError(fmt::format("cannot write {}", (root / "synth_config.json").string()));
  cfg << dataset.config.to_json().dump(2) << '\n';
}

}  // namespace ccc::data
