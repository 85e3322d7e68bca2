#include "etd/layers.hpp"

#include <stdexcept>
#include <string>

namespace etd {

LayerSpec dense(std::size_t units, Activation act) {
  if (units < 1) throw std::invalid_argument("dense: units must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  s.activation = act;
  return s;
}

LayerSpec conv2d(std::size_t filters, Activation act) {
  if (filters < 1) throw std::invalid_argument("conv2d: filters must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::Conv2D;
  s.units = filters;
  s.activation = act;
  return s;
}

LayerSpec maxpool2d() {
  LayerSpec s;
  s.kind = LayerKind::MaxPool2D;
  return s;
}

LayerSpec dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("dropout: rate must be in [0, 1)");
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.rate = rate;
  return s;
}

LayerSpec flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

LayerSpec reshape(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("reshape: target dims must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::Reshape;
  s.rows = rows;
  s.cols = cols;
  return s;
}

LayerSpec lstm(std::size_t units, bool return_sequences) {
  if (units < 1) throw std::invalid_argument("lstm: units must be >= 1");
  LayerSpec s;
  s.kind = LayerKind::Lstm;
  s.units = units;
  s.return_sequences = return_sequences;
  return s;
}

LayerSpec softmax_output(std::size_t classes) {
  if (classes < 2)
    throw std::invalid_argument("softmax_output: classes must be >= 2");
  LayerSpec s;
  s.kind = LayerKind::SoftmaxOutput;
  s.units = classes;
  return s;
}

std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in) {
  switch (spec.kind) {
    case LayerKind::Dense:
      if (in.size() != 1)
        throw std::invalid_argument("dense: expected rank-1 input, got " +
                                    shape_string(in));
      return {spec.units};
    case LayerKind::Conv2D:
      if (in.size() != 3)
        throw std::invalid_argument("conv2d: expected rank-3 input (h,w,c), got " +
                                    shape_string(in));
      return {in[0], in[1], spec.units};
    case LayerKind::MaxPool2D:
      if (in.size() != 3 || in[0] % 2 != 0 || in[1] % 2 != 0)
        throw std::invalid_argument("maxpool2d: expected rank-3 input with even h,w, got " +
                                    shape_string(in));
      return {in[0] / 2, in[1] / 2, in[2]};
    case LayerKind::Dropout:
      return in;
    case LayerKind::Flatten:
      return {shape_product(in)};
    case LayerKind::Reshape:
      if (shape_product(in) != spec.rows * spec.cols)
        throw std::invalid_argument("reshape: cannot map " + shape_string(in) +
                                    " onto " + std::to_string(spec.rows) + "x" +
                                    std::to_string(spec.cols));
      return {spec.rows, spec.cols, 1};
    case LayerKind::Lstm:
      if (in.size() != 2)
        throw std::invalid_argument("lstm: expected rank-2 input (time,features), got " +
                                    shape_string(in));
      if (spec.return_sequences) return {in[0], spec.units};
      return {spec.units};
    case LayerKind::SoftmaxOutput:
      if (in.size() != 1)
        throw std::invalid_argument("softmax_output: expected rank-1 input, got " +
                                    shape_string(in));
      return {spec.units};
  }
  throw std::logic_error("layer_output_shape: unknown layer kind");
}

std::string layer_to_string(const LayerSpec& spec) {
  const char* act = spec.activation == Activation::Relu ? "relu" : "linear";
  switch (spec.kind) {
    case LayerKind::Dense:
      return "Dense(" + std::to_string(spec.units) + ", " + act + ")";
    case LayerKind::Conv2D:
      return "Conv2D(" + std::to_string(spec.units) + ", 3x3, " + act + ")";
    case LayerKind::MaxPool2D:
      return "MaxPool2D(2x2)";
    case LayerKind::Dropout:
      return "Dropout(" + std::to_string(spec.rate) + ")";
    case LayerKind::Flatten:
      return "Flatten";
    case LayerKind::Reshape:
      return "Reshape(" + std::to_string(spec.rows) + "x" + std::to_string(spec.cols) + ")";
    case LayerKind::Lstm:
      return std::string("LSTM(") + std::to_string(spec.units) +
             (spec.return_sequences ? ", sequences)" : ")");
    case LayerKind::SoftmaxOutput:
      return "SoftmaxOutput(" + std::to_string(spec.units) + ")";
  }
  return "?";
}

}  // namespace etd
