#pragma once

#include "ccc/nn/rng.hpp"
#include "ccc/train/train_config.hpp"

namespace ccc::train {

/// Mini-batch BCE-on-logits training with Adam; trainable flags are honoured.
/// Throws ValidationError if the training set lacks either class.
TrainResult train_vanilla(models::Classifier& model, const TrainSet& set, const TrainConfig& cfg, nn::Rng& rng);

}  // namespace ccc::train
