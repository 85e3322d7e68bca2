#pragma once

#include <cstdint>
#include <vector>

#include "etd/model.hpp"
#include "etd/optimizer.hpp"

namespace etd {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-7;
  std::uint64_t seed = 0;
  double temperature = 1.0;  // softmax temperature during training
};

struct TrainResult {
  NeuralModel model;
  std::vector<double> epoch_losses;
};

/// Mini-batch RMSProp on cross-entropy. Labels may be one-hot or soft
/// probability rows (distillation). Shuffling and dropout are seeded, so a
/// fixed config + dataset + initial model gives bit-identical parameters.
/// The returned model keeps config.temperature. Divergence (non-finite loss
/// or gradient) raises std::runtime_error naming the epoch.
TrainResult train(const NeuralModel& model, const Tensor& inputs,
                  const Tensor& labels, const TrainConfig& config);

}  // namespace etd
