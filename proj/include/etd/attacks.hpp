#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etd/model.hpp"
#include "etd/rng.hpp"
#include "etd/tensor.hpp"

namespace etd {

enum class AttackKind { InitOnly, Fgsm, Fgv, Deepfool, SsfIter, Va1, Va2 };

std::string attack_kind_name(AttackKind kind);

struct AttackConfig {
  AttackKind kind = AttackKind::InitOnly;
  double epsilon = 0.1;       // fgsm / fgv step size
  std::size_t step = 10;      // ssf-iter iteration count
  double size = 0.1;          // ssf-iter per-step infinity-norm budget
  double sigma = 1e-4;        // Gaussian initialization scale
  std::size_t max_iter = 100;  // deepfool cap
  double alpha = 0.5;         // va1 scaling factor
  double u = 1.0;             // va2 uniform upper bound
  std::uint64_t seed = 0;
};

/// Elementwise max(v, 0); keeps adversarial measurements feasible.
Tensor clip_nonnegative(Tensor v);

/// i.i.d. Gaussian(0, sigma^2) entries, clipped nonnegative.
Tensor random_init(std::size_t n, double sigma, Rng& rng);

/// Single ascent step on the theft-label loss: a + eps * sign(grad),
/// clipped. sign(0) = 0.
Tensor fgsm_attack(const NeuralModel& model, const Tensor& a0, double epsilon);

/// Like FGSM but with the raw gradient values: a + eps * grad, clipped.
Tensor fgv_attack(const NeuralModel& model, const Tensor& a0, double epsilon);

struct DeepfoolResult {
  Tensor vector;
  std::size_t iterations = 0;
};

/// Projects toward the decision boundary of g = p(theft) - p(normal):
/// a <- clip(a - (g/|grad g|^2) grad g) until the model says Normal or the
/// cap is hit. Throws on a vanishing boundary gradient.
DeepfoolResult deepfool_attack(const NeuralModel& model, const Tensor& a0,
                               std::size_t max_iter);

struct SsfIterResult {
  Tensor vector;
  std::size_t gradient_evals = 0;  // < step only on early termination
};

/// Gaussian init, then `step` iterations of r = G * size / max|G| with a
/// nonnegativity clip after each move. Stops early when max|G| < 1e-12.
SsfIterResult ssf_iter_attack(const NeuralModel& surrogate, std::size_t step,
                              double size, double sigma, Rng& rng);

/// Scales a genuine normal profile by alpha (the h1 scenario as an attack).
Tensor va1_attack(const Tensor& base_profile, double alpha);

/// i.i.d. Uniform(0, u) measurement vector.
Tensor va2_attack(std::size_t n, double u, Rng& rng);

struct AdversarialBatch {
  Tensor vectors;  // [N, 48], nonnegative
  AttackConfig config;
  std::string surrogate_id;
  std::uint64_t surrogate_hash = 0;
  std::vector<std::size_t> iterations;  // per-vector gradient evaluations
};

/// Generates `count` vectors against the surrogate. Vector i draws from an
/// rng seeded by (config.seed, i), so the batch is deterministic and
/// parallelizable. VA1 needs `normal_pool` ([M,48] genuine profiles) to pick
/// base profiles from; other kinds ignore it.
AdversarialBatch generate_batch(const NeuralModel& surrogate,
                                const std::string& surrogate_id,
                                const AttackConfig& config, std::size_t count,
                                const Tensor* normal_pool = nullptr);

/// CSV (r01..r48,kind,iterations) plus `<path>.meta.json` sidecar carrying
/// the full config and the surrogate hash.
void save_batch(const AdversarialBatch& batch, const std::string& csv_path);

}  // namespace etd
