#include "etd/train.hpp"

#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

namespace etd {

TrainResult train(const NeuralModel& model, const Tensor& inputs,
                  const Tensor& labels, const TrainConfig& config) {
  if (inputs.shape.empty() || inputs.shape[0] == 0)
    throw std::invalid_argument("train: empty dataset");
  const std::size_t n = inputs.shape[0];
  if (labels.rank() != 2 || labels.shape[0] != n)
    throw std::invalid_argument("train: labels shape " + shape_string(labels.shape) +
                                " does not cover " + std::to_string(n) + " rows");
  if (!(config.learning_rate > 0.0) || config.batch_size == 0 ||
      !(config.rmsprop_decay > 0.0 && config.rmsprop_decay < 1.0) ||
      !(config.rmsprop_epsilon > 0.0) || !(config.temperature > 0.0))
    throw std::invalid_argument("train: invalid config");

  TrainResult result;
  result.model = model;
  result.model.temperature = config.temperature;
  if (config.epochs == 0) return result;

  const std::size_t d = inputs.size() / n;
  const std::size_t c = labels.shape[1];
  const std::size_t bs = std::min(config.batch_size, n);

  RmsPropConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.decay = config.rmsprop_decay;
  opt.epsilon = config.rmsprop_epsilon;
  RmsPropState state = init_rmsprop_state(result.model.params);

  Rng shuffle_rng(derive_seed(config.seed, 0));
  Rng dropout_rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.bounded(i + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    try {
      for (std::size_t start = 0; start < n; start += bs) {
        const std::size_t b = std::min(bs, n - start);
        Tensor bx({b, d}, std::vector<double>(b * d));
        Tensor by({b, c}, std::vector<double>(b * c));
        for (std::size_t i = 0; i < b; ++i) {
          const std::size_t row = order[start + i];
          std::memcpy(bx.values.data() + i * d, inputs.data() + row * d,
                      d * sizeof(double));
          std::memcpy(by.values.data() + i * c, labels.data() + row * c,
                      c * sizeof(double));
        }
        LossGradients lg = loss_gradients(result.model, bx, by, Mode::Train,
                                          &dropout_rng);
        epoch_loss += lg.loss * double(b);
        rmsprop_step(result.model.params, lg.param_grads, state, opt);
      }
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("training diverged at epoch " +
                               std::to_string(epoch) + ": " + e.what());
    }
    result.epoch_losses.push_back(epoch_loss / double(n));
  }
  return result;
}

}  // namespace etd
