#include "ccc/train/vanilla.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ccc/error.hpp"
#include "ccc/nn/adam.hpp"
#include "ccc/nn/loss.hpp"

namespace ccc::train {

TrainResult train_vanilla(models::Classifier& model, const TrainSet& set, const TrainConfig& cfg, nn::Rng& rng) {
  cfg.validate();
  if (set.has_features() && model.backbone_trainable()) {
    throw ConfigError("freeze", "cached backbone features require a frozen backbone");
  }
  const std::vector<int> labels = set.labels();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == labels.size()) {
    throw ValidationError(std::nullopt, "labels",
                          fmt::format("training set needs both classes, got {} positive of {}", positives, labels.size()));
  }
  nn::OptimConfig opt;
  opt.learning_rate = cfg.learning_rate;
  const nn::ParameterList params = model.parameters();
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      nn::Tensor targets({idx.size(), 1});
      for (std::size_t i = 0; i < idx.size(); ++i) targets[i] = static_cast<float>(labels[idx[i]]);
      nn::zero_grads(params);
      models::ClassifierCache cache;
      const nn::Tensor logits = forward_items(model, set, idx, &cache);
      const nn::LossResult loss = nn::loss_bce_logits(logits, targets);
      model.backward(cache, &loss.grad, nullptr);
      nn::adam_step(params, opt);
      epoch_loss += loss.value * static_cast<double>(idx.size());
    }
    epoch_loss /= static_cast<double>(set.size());
    spdlog::debug("vanilla epoch {}: loss {:.6f}", epoch, epoch_loss);
    result.snapshots.push_back(take_snapshot(model, epoch_loss));
  }
  return result;
}

}  // namespace ccc::train
