#pragma once

#include <cstddef>
#include <vector>

#include "etd/tensor.hpp"

namespace etd {

enum class LayerKind {
  Dense,
  Conv2D,
  MaxPool2D,
  Dropout,
  Flatten,
  Reshape,
  Lstm,
  SoftmaxOutput,
};

enum class Activation { Linear, Relu };

struct LayerSpec {
  LayerKind kind{};
  std::size_t units = 0;  // dense width / conv filters / lstm units / softmax classes
  Activation activation = Activation::Linear;
  double rate = 0.0;           // dropout
  std::size_t rows = 0;        // reshape target
  std::size_t cols = 0;        // reshape target
  bool return_sequences = false;  // lstm
};

LayerSpec dense(std::size_t units, Activation act = Activation::Relu);
LayerSpec conv2d(std::size_t filters, Activation act = Activation::Relu);
LayerSpec maxpool2d();
LayerSpec dropout(double rate);
LayerSpec flatten();
LayerSpec reshape(std::size_t rows, std::size_t cols);
LayerSpec lstm(std::size_t units, bool return_sequences);
LayerSpec softmax_output(std::size_t classes = 2);

struct LayerParams {
  std::vector<Tensor> tensors;
};

/// Per-sample output shape of `spec` applied to input shape `in`.
/// Throws std::invalid_argument when the layer cannot accept `in`.
std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in);

/// Human-readable layer description, e.g. "Dense(128, relu)".
std::string layer_to_string(const LayerSpec& spec);

}  // namespace etd
