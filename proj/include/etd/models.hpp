#pragma once

#include <string>
#include <vector>

#include "etd/data.hpp"
#include "etd/model.hpp"
#include "etd/train.hpp"

namespace etd {

enum class Family { Fnn, Cnn, Rnn };
enum class Side { Defender, Attacker };

struct ArchitectureId {
  Family family = Family::Fnn;
  Side side = Side::Defender;
  double width_scale = 1.0;  // 1.0 = full table widths
};

std::string family_name(Family f);
std::string side_name(Side s);
/// e.g. "fnn-defender-w0.25"
std::string model_id(const ArchitectureId& id);

/// Layer width after scaling: max(2, round(units * width_scale)).
std::size_t scale_units(std::size_t units, double width_scale);

/// The classifier stack for (family, side), widths scaled. FNN and CNN take
/// a length-48 input (the CNN reshapes it to a 6x8 grid); the RNN reads it
/// as 48 timesteps of one feature.
NeuralModel build_model(const ArchitectureId& id, std::uint64_t seed);

struct ClassifierMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double recall = 0.0;
};

/// Predicted class per row: argmax, exact ties classified Theft.
std::vector<std::size_t> classify(const NeuralModel& model, const Tensor& profiles);

/// Confusion metrics with Theft as the positive class.
ClassifierMetrics evaluate_classifier(const NeuralModel& model,
                                      const LabeledDataset& dataset);

/// Defensive distillation: a teacher of architecture `id` is trained at
/// temperature T on the hard labels, its probability rows become soft labels
/// for a student of the same architecture trained at T, and the student is
/// returned with temperature reset to 1 for deployment.
NeuralModel distill(const ArchitectureId& id, const LabeledDataset& train_set,
                    const TrainConfig& config, double temperature);

}  // namespace etd
