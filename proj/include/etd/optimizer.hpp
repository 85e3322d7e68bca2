#pragma once

#include <vector>

#include "etd/layers.hpp"
#include "etd/tensor.hpp"

namespace etd {

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;      // rho
  double epsilon = 1e-7;
};

/// Per-parameter running mean of squared gradients, congruent with the
/// model's parameter list.
struct RmsPropState {
  std::vector<LayerParams> mean_square;
};

RmsPropState init_rmsprop_state(const std::vector<LayerParams>& params);

/// Elementwise s <- rho*s + (1-rho)*g^2; p <- p - lr*g/(sqrt(s)+eps).
void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& mean_square,
                    const RmsPropConfig& cfg);

void rmsprop_step(std::vector<LayerParams>& params,
                  const std::vector<LayerParams>& grads, RmsPropState& state,
                  const RmsPropConfig& cfg);

}  // namespace etd
