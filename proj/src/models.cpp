#include "etd/models.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace etd {
namespace {

constexpr std::size_t kEvalChunk = 512;

std::vector<LayerSpec> fnn_stack(const std::vector<std::size_t>& widths, double s) {
  // widths: four leading dense layers plus the post-dropout dense layer
  std::vector<LayerSpec> L;
  for (std::size_t k = 0; k < 4; ++k) L.push_back(dense(scale_units(widths[k], s)));
  L.push_back(dropout(0.25));
  L.push_back(dense(scale_units(widths[4], s)));
  L.push_back(dropout(0.25));
  L.push_back(softmax_output(2));
  return L;
}

std::vector<LayerSpec> rnn_stack(const std::vector<std::size_t>& widths, double s) {
  std::vector<LayerSpec> L;
  L.push_back(lstm(scale_units(widths[0], s), true));
  L.push_back(dropout(0.25));
  L.push_back(lstm(scale_units(widths[1], s), true));
  L.push_back(dropout(0.25));
  L.push_back(lstm(scale_units(widths[2], s), false));
  L.push_back(softmax_output(2));
  return L;
}

std::vector<LayerSpec> cnn_stack(const std::vector<std::size_t>& widths, double s) {
  std::vector<LayerSpec> L;
  L.push_back(reshape(6, 8));
  L.push_back(conv2d(scale_units(widths[0], s)));
  L.push_back(conv2d(scale_units(widths[1], s)));
  L.push_back(maxpool2d());
  L.push_back(dropout(0.25));
  L.push_back(flatten());
  L.push_back(dense(scale_units(widths[2], s)));
  L.push_back(softmax_output(2));
  return L;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Fnn: return "fnn";
    case Family::Cnn: return "cnn";
    case Family::Rnn: return "rnn";
  }
  return "?";
}

std::string side_name(Side s) {
  return s == Side::Defender ? "defender" : "attacker";
}

std::string model_id(const ArchitectureId& id) {
  char scale[32];
  std::snprintf(scale, sizeof scale, "%g", id.width_scale);
  return family_name(id.family) + "-" + side_name(id.side) + "-w" + scale;
}

std::size_t scale_units(std::size_t units, double width_scale) {
  if (!(width_scale > 0.0))
    throw std::invalid_argument("scale_units: width scale must be positive");
  const auto scaled = std::llround(double(units) * width_scale);
  return scaled < 2 ? 2 : std::size_t(scaled);
}

NeuralModel build_model(const ArchitectureId& id, std::uint64_t seed) {
  const double s = id.width_scale;
  switch (id.family) {
    case Family::Fnn: {
      const bool def = id.side == Side::Defender;
      const std::vector<std::size_t> widths =
          def ? std::vector<std::size_t>{128, 256, 128, 64, 32}
              : std::vector<std::size_t>{168, 328, 168, 128, 64};
      return init_model({kIntervalsPerDay}, fnn_stack(widths, s), seed);
    }
    case Family::Rnn: {
      const bool def = id.side == Side::Defender;
      const std::vector<std::size_t> widths =
          def ? std::vector<std::size_t>{256, 168, 128}
              : std::vector<std::size_t>{246, 148, 108};
      return init_model({kIntervalsPerDay, 1}, rnn_stack(widths, s), seed);
    }
    case Family::Cnn: {
      const bool def = id.side == Side::Defender;
      const std::vector<std::size_t> widths =
          def ? std::vector<std::size_t>{128, 128, 32}
              : std::vector<std::size_t>{156, 214, 48};
      return init_model({kIntervalsPerDay}, cnn_stack(widths, s), seed);
    }
  }
  throw std::logic_error("build_model: unknown family");
}

std::vector<std::size_t> classify(const NeuralModel& model, const Tensor& profiles) {
  if (profiles.rank() != 2)
    throw std::invalid_argument("classify: expected a [N,48] tensor");
  const std::size_t n = profiles.shape[0], d = profiles.shape[1];
  std::vector<std::size_t> out(n);
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t b = std::min(kEvalChunk, n - start);
    Tensor chunk({b, d},
                 std::vector<double>(profiles.values.begin() + long(start * d),
                                     profiles.values.begin() + long((start + b) * d)));
    const Tensor probs = forward(model, chunk);
    for (std::size_t i = 0; i < b; ++i)
      out[start + i] = probs.at(i, kLabelTheft) >= probs.at(i, kLabelNormal)
                           ? kLabelTheft
                           : kLabelNormal;
  }
  return out;
}

ClassifierMetrics evaluate_classifier(const NeuralModel& model,
                                      const LabeledDataset& dataset) {
  if (dataset.rows() == 0)
    throw std::invalid_argument("evaluate_classifier: empty dataset");
  const std::vector<std::size_t> pred = classify(model, dataset.profiles);
  ClassifierMetrics m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool truth_theft = dataset.labels.at(i, kLabelTheft) == 1.0;
    const bool pred_theft = pred[i] == kLabelTheft;
    if (truth_theft && pred_theft) ++m.tp;
    else if (truth_theft) ++m.fn;
    else if (pred_theft) ++m.fp;
    else ++m.tn;
  }
  const double total = double(m.tp + m.fp + m.tn + m.fn);
  m.accuracy = double(m.tp + m.tn) / total;
  m.false_positive_rate = m.fp + m.tn > 0 ? double(m.fp) / double(m.fp + m.tn) : 0.0;
  m.recall = m.tp + m.fn > 0 ? double(m.tp) / double(m.tp + m.fn) : 0.0;
  return m;
}

NeuralModel distill(const ArchitectureId& id, const LabeledDataset& train_set,
                    const TrainConfig& config, double temperature) {
  if (!(temperature >= 1.0))
    throw std::invalid_argument("distill: temperature must be >= 1");
  TrainConfig teacher_cfg = config;
  teacher_cfg.temperature = temperature;
  teacher_cfg.seed = derive_seed(config.seed, 103);
  NeuralModel teacher = build_model(id, derive_seed(config.seed, 101));
  TrainResult taught =
      train(teacher, train_set.profiles, train_set.labels, teacher_cfg);

  // The teacher's temperature-T probability rows become the soft labels.
  const std::size_t n = train_set.rows();
  Tensor soft = Tensor::zeros({n, 2});
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t b = std::min(kEvalChunk, n - start);
    Tensor chunk({b, kIntervalsPerDay},
                 std::vector<double>(
                     train_set.profiles.values.begin() + long(start * kIntervalsPerDay),
                     train_set.profiles.values.begin() +
                         long((start + b) * kIntervalsPerDay)));
    const Tensor probs = forward(taught.model, chunk);
    std::memcpy(soft.values.data() + start * 2, probs.data(),
                b * 2 * sizeof(double));
  }

  TrainConfig student_cfg = config;
  student_cfg.temperature = temperature;
  student_cfg.seed = derive_seed(config.seed, 104);
  NeuralModel student = build_model(id, derive_seed(config.seed, 102));
  TrainResult distilled = train(student, train_set.profiles, soft, student_cfg);
  distilled.model.temperature = 1.0;  // deployed at T = 1
  return distilled.model;
}

}  // namespace etd
