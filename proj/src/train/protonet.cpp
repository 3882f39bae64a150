#include "ccc/train/protonet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ccc/error.hpp"
#include "ccc/nn/adam.hpp"

namespace ccc::train {
namespace {

double squared_distance(const float* a, const float* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = double(a[i]) - double(b[i]);
    s += diff * diff;
  }
  return s;
}

std::vector<double> softmax_neg(const std::vector<double>& d2) {
  const double lo = *std::min_element(d2.begin(), d2.end());
  std::vector<double> p(d2.size());
  double z = 0.0;
  for (std::size_t c = 0; c < d2.size(); ++c) z += (p[c] = std::exp(-(d2[c] - lo)));
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

nn::Tensor class_prototypes(const nn::Tensor& embeddings, std::span<const int> labels, std::size_t n_way) {
  if (embeddings.rank() != 2 || embeddings.dim(0) != labels.size()) {
    throw ShapeError("embeddings", fmt::format("embeddings {} for {} labels", nn::shape_string(embeddings.shape()), labels.size()));
  }
  const std::size_t d = embeddings.dim(1);
  std::vector<double> sums(n_way * d, 0.0);
  std::vector<std::size_t> counts(n_way, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || c >= n_way) throw ValidationError(i, "label", fmt::format("label {} outside 0..{}", labels[i], n_way - 1));
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += embeddings.at(i, j);
  }
  nn::Tensor out({n_way, d});
  for (std::size_t c = 0; c < n_way; ++c) {
    if (counts[c] == 0) throw ValidationError(std::nullopt, "prototypes", fmt::format("class {} has no embeddings", c));
    for (std::size_t j = 0; j < d; ++j) out.at(c, j) = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
  }
  return out;
}

std::vector<double> class_probabilities(std::span<const float> embedding, const nn::Tensor& prototypes) {
  if (prototypes.rank() != 2 || prototypes.dim(1) != embedding.size()) {
    throw ShapeError("prototypes", fmt::format("prototypes {} for a {}-dim embedding", nn::shape_string(prototypes.shape()),
                                               embedding.size()));
  }
  std::vector<double> d2(prototypes.dim(0));
  for (std::size_t c = 0; c < d2.size(); ++c) {
    d2[c] = squared_distance(embedding.data(), prototypes.data() + c * embedding.size(), embedding.size());
  }
  return softmax_neg(d2);
}

double fsl_predict(std::span<const float> embedding, const nn::Tensor& prototypes) {
  if (prototypes.empty() || prototypes.rank() != 2 || prototypes.dim(0) != 2) {
    throw ValidationError(std::nullopt, "prototypes", "fsl_predict needs exactly two prototypes");
  }
  return class_probabilities(embedding, prototypes)[1];
}

ProtoLoss prototypical_loss(const nn::Tensor& support, std::span<const int> support_labels, const nn::Tensor& query,
                            std::span<const int> query_labels, std::size_t n_way) {
  if (query.rank() != 2 || query.dim(0) != query_labels.size() || query.dim(1) != support.dim(1)) {
    throw ShapeError("query", fmt::format("query {} for {} labels", nn::shape_string(query.shape()), query_labels.size()));
  }
  const std::size_t d = support.dim(1), nq = query.dim(0);
  const nn::Tensor protos = class_prototypes(support, support_labels, n_way);
  std::vector<std::size_t> counts(n_way, 0);
  for (int l : support_labels) ++counts[static_cast<std::size_t>(l)];

  ProtoLoss out;
  out.grad_query = nn::Tensor(query.shape());
  std::vector<double> grad_proto(n_way * d, 0.0);
  std::size_t correct = 0;
  for (std::size_t q = 0; q < nq; ++q) {
    const auto y = static_cast<std::size_t>(query_labels[q]);
    if (query_labels[q] < 0 || y >= n_way) throw ValidationError(q, "label", "query label outside the class range");
    const float* e = query.data() + q * d;
    std::vector<double> d2(n_way);
    for (std::size_t c = 0; c < n_way; ++c) d2[c] = squared_distance(e, protos.data() + c * d, d);
    const std::vector<double> p = softmax_neg(d2);
    out.loss -= std::log(std::max(p[y], 1e-300));
    if (std::min_element(d2.begin(), d2.end()) - d2.begin() == static_cast<std::ptrdiff_t>(y)) ++correct;
    // logits z_c = −d²_c; dL/dz_c = p_c − [c = y]
    for (std::size_t c = 0; c < n_way; ++c) {
      const double g = (p[c] - (c == y ? 1.0 : 0.0)) / static_cast<double>(nq);
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = double(e[j]) - double(protos.at(c, j));
        out.grad_query[q * d + j] += static_cast<float>(-2.0 * g * diff);
        grad_proto[c * d + j] += 2.0 * g * diff;
      }
    }
  }
  out.loss /= static_cast<double>(nq);
  out.accuracy = static_cast<double>(correct) / static_cast<double>(nq);
  out.grad_support = nn::Tensor(support.shape());
  for (std::size_t s = 0; s < support_labels.size(); ++s) {
    const auto c = static_cast<std::size_t>(support_labels[s]);
    for (std::size_t j = 0; j < d; ++j) {
      out.grad_support[s * d + j] = static_cast<float>(grad_proto[c * d + j] / static_cast<double>(counts[c]));
    }
  }
  return out;
}

Episode sample_episode(std::span<const int> labels, const EpisodeConfig& cfg, nn::Rng& rng) {
  Episode ep;
  const std::size_t need = cfg.k_shot + cfg.n_query;
  for (std::size_t c = 0; c < cfg.n_way; ++c) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == static_cast<int>(c)) pool.push_back(i);
    }
    if (pool.size() < need) {
      throw ValidationError(std::nullopt, "episodes",
                            fmt::format("class {} has {} training clips, an episode needs k_shot + n_query = {}", c,
                                        pool.size(), need));
    }
    // Partial Fisher-Yates: the first `need` slots become a uniform draw.
    for (std::size_t i = 0; i < need; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < cfg.k_shot; ++i) {
      ep.support.push_back(pool[i]);
      ep.support_labels.push_back(static_cast<int>(c));
    }
    for (std::size_t i = cfg.k_shot; i < need; ++i) {
      ep.query.push_back(pool[i]);
      ep.query_labels.push_back(static_cast<int>(c));
    }
  }
  return ep;
}

TrainResult train_fsl(models::Classifier& model, const TrainSet& set, const TrainConfig& cfg, nn::Rng& rng) {
  cfg.validate();
  if (set.has_features() && model.backbone_trainable()) {
    throw ConfigError("freeze", "cached backbone features require a frozen backbone");
  }
  const std::vector<int> labels = set.labels();
  const std::size_t need = cfg.episodes.k_shot + cfg.episodes.n_query;
  for (int c = 0; c < 2; ++c) {
    const auto n = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    if (n < need) {
      throw ValidationError(std::nullopt, "episodes",
                            fmt::format("class {} has {} training clips, an episode needs {}", c, n, need));
    }
  }
  const std::size_t dim = model.config().temporal_channels;
  nn::OptimConfig opt;
  opt.learning_rate = cfg.learning_rate;
  const nn::ParameterList params = model.parameters();
  std::vector<std::size_t> all(set.size());
  std::iota(all.begin(), all.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t e = 0; e < cfg.episodes.episodes_per_epoch; ++e) {
      const Episode ep = sample_episode(labels, cfg.episodes, rng);
      std::vector<std::size_t> items = ep.support;
      items.insert(items.end(), ep.query.begin(), ep.query.end());
      const std::size_t ns = ep.support.size();

      nn::zero_grads(params);
      // Cached features: keep one small head cache per clip. Otherwise the
      // backbone activations are recomputed chunk by chunk in the backward
      // pass so only one chunk is alive at a time.
      constexpr std::size_t chunk = 4;
      std::vector<models::ClassifierCache> caches;
      nn::Tensor emb;
      if (set.has_features()) {
        emb = nn::Tensor({items.size(), dim});
        caches.resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
          forward_items(model, set, std::span<const std::size_t>(&items[i], 1), &caches[i]);
          std::copy(caches[i].embedding.data(), caches[i].embedding.data() + dim, emb.data() + i * dim);
        }
      } else {
        emb = embed_all(model, set, items);
      }
      nn::Tensor support({ns, dim}), query({items.size() - ns, dim});
      std::copy(emb.data(), emb.data() + ns * dim, support.data());
      std::copy(emb.data() + ns * dim, emb.data() + emb.size(), query.data());
      const ProtoLoss loss = prototypical_loss(support, ep.support_labels, query, ep.query_labels, cfg.episodes.n_way);

      nn::Tensor grad_emb(emb.shape());
      std::copy(loss.grad_support.values().begin(), loss.grad_support.values().end(), grad_emb.data());
      std::copy(loss.grad_query.values().begin(), loss.grad_query.values().end(), grad_emb.data() + ns * dim);
      const std::size_t step = set.has_features() ? 1 : chunk;
      for (std::size_t start = 0; start < items.size(); start += step) {
        const std::size_t n = std::min(step, items.size() - start);
        nn::Tensor g({n, dim});
        std::copy(grad_emb.data() + start * dim, grad_emb.data() + (start + n) * dim, g.data());
        if (set.has_features()) {
          model.backward(caches[start], nullptr, &g);
        } else {
          models::ClassifierCache part;
          forward_items(model, set, std::span<const std::size_t>(items.data() + start, n), &part);
          model.backward(part, nullptr, &g);
        }
      }
      nn::adam_step(params, opt);
      epoch_loss += loss.loss;
    }
    epoch_loss /= static_cast<double>(cfg.episodes.episodes_per_epoch);
    nn::Tensor protos = class_prototypes(embed_all(model, set, all), labels, cfg.episodes.n_way);
    spdlog::debug("fsl epoch {}: loss {:.6f}", epoch, epoch_loss);
    result.snapshots.push_back(take_snapshot(model, epoch_loss, std::move(protos)));
  }
  return result;
}

}  // namespace ccc::train
