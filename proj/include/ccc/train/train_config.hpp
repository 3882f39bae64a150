#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccc/data/clip.hpp"
#include "ccc/models/classifier.hpp"

namespace ccc::train {

enum class TrainMode { vanilla, fsl };

TrainMode parse_train_mode(const std::string& text);
std::string to_string(TrainMode mode);

struct EpisodeConfig {
  std::size_t n_way = 2;
  std::size_t k_shot = 5;
  std::size_t n_query = 5;
  std::size_t episodes_per_epoch = 100;

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::vanilla;
  models::FreezeMode freeze = models::FreezeMode::none;
  EpisodeConfig episodes;
  models::ClassifierConfig classifier;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are ignored.
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Training inputs. `features` is either empty or holds, per clip, the
/// concatenated backbone features [frames·C,H,W]; it may only be used while
/// the backbone is frozen.
struct TrainSet {
  std::vector<const data::Clip*> clips;
  std::vector<const nn::Tensor*> features;

  std::size_t size() const { return clips.size(); }
  bool has_features() const { return !features.empty(); }
  std::vector<int> labels() const;
};

/// Parameter values after one epoch (in Classifier::parameters() order), the
/// epoch's mean training loss and, for FSL, the inference prototypes [2,D].
struct EpochSnapshot {
  std::vector<nn::Tensor> values;
  std::optional<nn::Tensor> prototypes;
  double train_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochSnapshot> snapshots;  // one per epoch
};

EpochSnapshot take_snapshot(models::Classifier& model, double train_loss, std::optional<nn::Tensor> prototypes = {});
void restore_snapshot(models::Classifier& model, const EpochSnapshot& snap);

/// Runs the model on items `idx` of `set`; returns logits [n,1] and fills
/// `cache` (including backbone activations when features are not cached).
nn::Tensor forward_items(const models::Classifier& model, const TrainSet& set, std::span<const std::size_t> idx,
                         models::ClassifierCache* cache = nullptr);

/// Embeddings [n,D] of every item, computed in chunks without caches.
nn::Tensor embed_all(const models::Classifier& model, const TrainSet& set, std::span<const std::size_t> idx);

/// Concatenated backbone features [frames·C,H,W] of one clip.
nn::Tensor clip_features(const models::Classifier& model, const data::Clip& clip);

/// Probability of CCC: sigmoid(logit) for vanilla snapshots, the
/// softmax-over-distances rule when prototypes are present.
double predict_probability(const models::Classifier& model, const std::optional<nn::Tensor>& prototypes,
                           const data::Clip& clip, const nn::Tensor* features = nullptr);

}  // namespace ccc::train
