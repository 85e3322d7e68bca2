#include "etd/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace etd {

RmsPropState init_rmsprop_state(const std::vector<LayerParams>& params) {
  RmsPropState state;
  state.mean_square.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    for (const Tensor& t : params[k].tensors)
      state.mean_square[k].tensors.push_back(Tensor::zeros(t.shape));
  return state;
}

void rmsprop_update(Tensor& param, const Tensor& grad, Tensor& mean_square,
                    const RmsPropConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(mean_square))
    throw std::invalid_argument("rmsprop_update: shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.values[i];
    double& s = mean_square.values[i];
    s = cfg.decay * s + (1.0 - cfg.decay) * g * g;
    param.values[i] -= cfg.learning_rate * g / (std::sqrt(s) + cfg.epsilon);
  }
}

void rmsprop_step(std::vector<LayerParams>& params,
                  const std::vector<LayerParams>& grads, RmsPropState& state,
                  const RmsPropConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.mean_square.size())
    throw std::invalid_argument("rmsprop_step: layer count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].tensors.size() != grads[k].tensors.size())
      throw std::invalid_argument("rmsprop_step: tensor count mismatch");
    for (std::size_t t = 0; t < params[k].tensors.size(); ++t)
      rmsprop_update(params[k].tensors[t], grads[k].tensors[t],
                     state.mean_square[k].tensors[t], cfg);
  }
}

}  // namespace etd
