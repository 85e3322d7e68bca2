#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "etd/layers.hpp"
#include "etd/rng.hpp"
#include "etd/tensor.hpp"

namespace etd {

enum class Mode { Train, Infer };

struct NeuralModel {
  std::vector<std::size_t> input_shape;
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;
  double temperature = 1.0;
  // Counts input-gradient queries against this model. Black-box runs assert
  // the defender's counter stays flat while the surrogate absorbs the calls.
  std::shared_ptr<std::atomic<std::uint64_t>> gradient_queries =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

/// Builds a model with seeded fan-scaled uniform weights (biases zero,
/// except LSTM forget-gate biases at 1). Validates the layer stack: shapes
/// must chain and the final layer must be SoftmaxOutput.
NeuralModel init_model(std::vector<std::size_t> input_shape,
                       std::vector<LayerSpec> layers, std::uint64_t seed);

/// Per-sample output shape after each layer (same length as model.layers).
std::vector<std::vector<std::size_t>> layer_output_shapes(const NeuralModel& model);

std::size_t parameter_count(const NeuralModel& model);

/// Runs the stack on a batch shaped [N, ...input-shape] (any shape whose
/// element count is N * product(input-shape) is accepted) and returns [N, C]
/// probabilities. Train mode needs an rng for dropout; infer mode ignores it
/// and dropout layers pass through.
Tensor forward(const NeuralModel& model, const Tensor& batch,
               Mode mode = Mode::Infer, Rng* rng = nullptr);

/// Mean negative log-likelihood; probabilities floored at 1e-12 before log.
/// Labels may be soft rows (used by distillation) as long as each row sums
/// to 1.
double cross_entropy(const Tensor& probs, const Tensor& labels);

struct LossGradients {
  double loss = 0.0;
  Tensor probs;
  std::vector<LayerParams> param_grads;  // congruent with model.params
};

/// Forward + reverse pass for training: gradients of the mean cross-entropy
/// w.r.t. every parameter tensor. Dropout masks are drawn from `rng` when
/// mode is Train.
LossGradients loss_gradients(const NeuralModel& model, const Tensor& batch,
                             const Tensor& labels, Mode mode, Rng* rng);

/// Gradient of each row's own cross-entropy w.r.t. that row's input entries.
/// Counts as a gradient query. Infer mode (dropout off).
Tensor input_gradient(const NeuralModel& model, const Tensor& batch,
                      const Tensor& labels);

/// Gradient of the class-`index` softmax output w.r.t. the input, row-wise.
/// Counts as a gradient query.
Tensor prob_input_gradient(const NeuralModel& model, const Tensor& batch,
                           std::size_t class_index);

struct MarginGradient {
  double margin = 0.0;  // p(theft) - p(normal)
  Tensor grad;          // d margin / d input, same shape as the input
};

/// Decision margin and its input gradient for one sample (DeepFool's g).
/// Counts as a gradient query.
MarginGradient margin_and_gradient(const NeuralModel& model, const Tensor& input);

/// Central-difference oracle: (L(a + h e_i) - L(a - h e_i)) / (2h) per
/// coordinate, infer mode. Exact for models linear in the input.
Tensor finite_diff_gradient(const NeuralModel& model, const Tensor& input,
                            const Tensor& label, double h);

/// Distance to the nearest movable piecewise-linear kink along the stack:
/// the minimum |preactivation| over ReLU units and minimum top-two gap over
/// pooling windows. Exact zeros are skipped: a ReLU fed only by dead units
/// (zero bias) or an all-zero pooling window sits on a locally constant
/// plateau, not a crossable kink. Central differences are a valid oracle
/// only when the probe stays on one linear piece, i.e. this margin is
/// comfortably above the probe size.
double kink_margin(const NeuralModel& model, const Tensor& input);

}  // namespace etd
