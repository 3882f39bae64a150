#include "ccc/train/pretrain.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ccc/data/clip.hpp"
#include "ccc/error.hpp"
#include "ccc/nn/adam.hpp"
#include "ccc/nn/loss.hpp"

namespace ccc::train {
namespace {

struct FrameSample {
  nn::Tensor input;   // [1,H,W]
  nn::Tensor target;  // [1,H,W]
};

std::vector<FrameSample> collect(const std::vector<data::StoredSequence>& seqs, const std::vector<std::size_t>& idx,
                                 const data::MaskConfig& mask) {
  std::vector<FrameSample> out;
  for (std::size_t i : idx) {
    const auto& s = seqs[i];
    const std::size_t h = s.sequence.height(), w = s.sequence.width();
    for (std::size_t f = 0; f < s.sequence.frames.size(); ++f) {
      FrameSample fs;
      fs.input = segmentation_input(s.sequence.frames[f]).reshaped({1, h, w});
      fs.target = data::gaussian_mask(s.centerlines[f], h, w, mask).reshaped({1, h, w});
      out.push_back(std::move(fs));
    }
  }
  return out;
}

nn::Tensor batch_of(const std::vector<FrameSample>& samples, std::span<const std::size_t> idx, bool target) {
  std::vector<const nn::Tensor*> items;
  for (std::size_t i : idx) items.push_back(target ? &samples[i].target : &samples[i].input);
  return nn::stack(items);
}

double mean_loss(const models::Segmenter& model, const std::vector<FrameSample>& samples, std::size_t batch) {
  double total = 0.0;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t start = 0; start < samples.size(); start += batch) {
    const std::span<const std::size_t> idx(order.data() + start, std::min(batch, samples.size() - start));
    const nn::Tensor pred = model.forward(batch_of(samples, idx, false));
    total += nn::loss_mse(pred, batch_of(samples, idx, true)).value * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(samples.size());
}

std::vector<nn::Tensor> snapshot(models::Segmenter& model) {
  std::vector<nn::Tensor> out;
  for (const nn::Parameter* p : model.parameters()) out.push_back(p->value);
  return out;
}

void restore(models::Segmenter& model, const std::vector<nn::Tensor>& values) {
  const nn::ParameterList params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

void PretrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs", "max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience", "patience must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size", "batch_size must be >= 1");
  if (!(train_fraction > 0.0 && val_fraction > 0.0 && train_fraction + val_fraction < 1.0)) {
    throw ConfigError("train_fraction", "train/val fractions must be positive and leave room for a test split");
  }
  mask.validate();
  backbone.validate();
}

nlohmann::json PretrainConfig::to_json() const {
  return {{"max_epochs", max_epochs},         {"patience", patience},          {"learning_rate", learning_rate},
          {"batch_size", batch_size},         {"seed", seed},                  {"train_fraction", train_fraction},
          {"val_fraction", val_fraction},     {"mask_sigma_px", mask.sigma_px}, {"backbone", backbone.to_json()}};
}

PretrainConfig PretrainConfig::from_json(const nlohmann::json& j) {
  PretrainConfig c;
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  c.mask.sigma_px = j.value("mask_sigma_px", c.mask.sigma_px);
  if (j.contains("backbone")) c.backbone = models::BackboneConfig::from_json(j.at("backbone"));
  c.validate();
  return c;
}

SequenceSplit split_sequences(std::size_t n, double train_fraction, double val_fraction, std::uint64_t seed) {
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw ValidationError(std::nullopt, "split",
                          fmt::format("{} sequences leave an empty split ({} train, {} val, {} test)", n, n_train, n_val,
                                      n >= n_train + n_val ? n - n_train - n_val : 0));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::Rng rng(nn::derive_seed(seed, "pretrain-split"));
  rng.shuffle(order);
  SequenceSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

nn::Tensor segmentation_input(const nn::Tensor& frame) {
  nn::Tensor x = frame;
  data::zscore_inplace(x);
  return x;
}

nn::ModelCheckpoint PretrainResult::checkpoint(const PretrainConfig& cfg) const {
  nlohmann::json prov = {{"seed", cfg.seed},
                         {"epochs_run", history.size()},
                         {"best_epoch", best_epoch},
                         {"config_hash", nn::config_hash(cfg.to_json())},
                         {"config", cfg.to_json()},
                         {"test_dice", test.dice}};
  return model.to_checkpoint(std::move(prov));
}

PretrainResult pretrain_segmentation(const std::vector<data::StoredSequence>& sequences, const PretrainConfig& cfg) {
  cfg.validate();
  if (sequences.empty()) throw ValidationError(std::nullopt, "sequences", "pretraining dataset is empty");
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].centerlines.size() != sequences[i].sequence.frames.size()) {
      throw ValidationError(i, "centerlines",
                            fmt::format("sequence {} has {} centerline sets for {} frames", sequences[i].sequence.ica_id,
                                        sequences[i].centerlines.size(), sequences[i].sequence.frames.size()));
    }
  }
  PretrainResult result{models::Segmenter(cfg.backbone), {}, 0, {}, 0.0, {}};
  result.split = split_sequences(sequences.size(), cfg.train_fraction, cfg.val_fraction, cfg.seed);
  const auto train = collect(sequences, result.split.train, cfg.mask);
  const auto val = collect(sequences, result.split.val, cfg.mask);
  const auto test = collect(sequences, result.split.test, cfg.mask);
  spdlog::info("pretrain: {} train / {} val / {} test frames", train.size(), val.size(), test.size());

  models::Segmenter& model = result.model;
  nn::Rng init_rng(nn::derive_seed(cfg.seed, "pretrain-init"));
  model.init(init_rng);
  nn::Rng batch_rng(nn::derive_seed(cfg.seed, "pretrain-batches"));
  nn::OptimConfig opt;
  opt.learning_rate = cfg.learning_rate;
  const nn::ParameterList params = model.parameters();

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<nn::Tensor> best = snapshot(model);
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    batch_rng.shuffle(order);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      nn::zero_grads(params);
      models::SegmenterCache cache;
      const nn::Tensor pred = model.forward(batch_of(train, idx, false), &cache);
      const nn::LossResult loss = nn::loss_mse(pred, batch_of(train, idx, true));
      model.backward(cache, loss.grad);
      nn::adam_step(params, opt);
      train_loss += loss.value * static_cast<double>(idx.size());
    }
    train_loss /= static_cast<double>(train.size());
    const double val_loss = mean_loss(model, val, cfg.batch_size);
    result.history.push_back({epoch, train_loss, val_loss});
    spdlog::info("pretrain epoch {}: train {:.6f} val {:.6f}", epoch, train_loss, val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = snapshot(model);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      spdlog::info("pretrain: early stop after epoch {} (best {})", epoch, result.best_epoch);
      break;
    }
  }
  restore(model, best);

  result.test_loss = mean_loss(model, test, cfg.batch_size);
  eval::PixelCounts pooled;
  for (const auto& s : test) pooled += eval::pixel_counts(model.predict(s.input).reshaped(s.target.shape()), s.target, 0.5);
  result.test = eval::dice_from_counts(pooled);
  spdlog::info("pretrain: test dice {:.4f} sens {:.4f} spec {:.4f}", result.test.dice, result.test.sensitivity,
               result.test.specificity);
  return result;
}

}  // namespace ccc::train
