#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/data/sequence.hpp"

namespace ccc::data {

struct SynthConfig {
  std::size_t n_sequences = 40;
  double positive_ratio = 0.5;
  std::size_t image_size = 64;
  std::size_t frames_per_sequence = 15;
  std::uint64_t seed = 0;
  std::size_t icas_per_patient = 1;
  /// Background noise standard deviation (intensity units).
  double noise_std = 0.03;
  /// Radius range of the bridging collateral vessel, in pixels.
  double collateral_radius_min = 0.8;
  double collateral_radius_max = 1.2;

  /// Preset used for ablation runs: more noise and thinner collaterals.
  static SynthConfig hard(std::uint64_t seed);

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthSample {
  AngioSequence sequence;
  std::optional<CccAnnotation> annotation;  // present iff the sequence is positive
  std::vector<CenterlineSet> centerlines;   // per frame: the contrast-filled vessel parts
  std::vector<nn::Tensor> vessel_opacity;   // per frame: rendered vessel layer in [0,1]
};

struct SynthDataset {
  SynthConfig config;
  std::vector<SynthSample> samples;

  std::size_t positives() const;
};

/// Renders vessel trees with simulated contrast propagation. Positive
/// sequences fill one tree retrogradely through a thin bridging vessel.
SynthDataset synth_generate(const SynthConfig& cfg);

/// Writes the sequence store, annotations.json and synth_config.json under `root`.
void write_synth_dataset(const SynthDataset& dataset, const std::filesystem::path& root);

}  // namespace ccc::data
