#include "etd/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "etd/serialize.hpp"
#include "etd/theft.hpp"
#include "json.hpp"

namespace etd {
namespace {

constexpr double kVanishingGradient = 1e-12;

Tensor theft_label() { return Tensor({1, 2}, {0.0, 1.0}); }

}  // namespace

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::InitOnly: return "init-only";
    case AttackKind::Fgsm: return "fgsm";
    case AttackKind::Fgv: return "fgv";
    case AttackKind::Deepfool: return "deepfool";
    case AttackKind::SsfIter: return "ssf-iter";
    case AttackKind::Va1: return "va1";
    case AttackKind::Va2: return "va2";
  }
  return "?";
}

Tensor clip_nonnegative(Tensor v) {
  for (double& x : v.values) x = x > 0.0 ? x : 0.0;
  return v;
}

Tensor random_init(std::size_t n, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("random_init: sigma must be >= 0");
  Tensor v = Tensor::zeros({n});
  for (double& x : v.values) x = rng.normal(0.0, sigma);
  return clip_nonnegative(std::move(v));
}

Tensor fgsm_attack(const NeuralModel& model, const Tensor& a0, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fgsm: epsilon must be > 0");
  const Tensor g = input_gradient(model, a0, theft_label());
  Tensor a = a0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = g.values[i] > 0.0 ? 1.0 : (g.values[i] < 0.0 ? -1.0 : 0.0);
    a.values[i] += epsilon * s;
  }
  return clip_nonnegative(std::move(a));
}

Tensor fgv_attack(const NeuralModel& model, const Tensor& a0, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fgv: epsilon must be > 0");
  const Tensor g = input_gradient(model, a0, theft_label());
  Tensor a = a0;
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] += epsilon * g.values[i];
  return clip_nonnegative(std::move(a));
}

DeepfoolResult deepfool_attack(const NeuralModel& model, const Tensor& a0,
                               std::size_t max_iter) {
  if (max_iter < 1) throw std::invalid_argument("deepfool: max_iter must be >= 1");
  DeepfoolResult out;
  out.vector = clip_nonnegative(a0);
  while (out.iterations < max_iter) {
    const MarginGradient mg = margin_and_gradient(model, out.vector);
    if (mg.margin < 0.0) return out;  // classified Normal, done
    double norm2 = 0.0;
    for (double v : mg.grad.values) norm2 += v * v;
    if (std::sqrt(norm2) < kVanishingGradient)
      throw std::runtime_error(
          "deepfool: boundary gradient vanished after " +
          std::to_string(out.iterations) + " iterations");
    const double scale = mg.margin / norm2;
    for (std::size_t i = 0; i < out.vector.size(); ++i)
      out.vector.values[i] -= scale * mg.grad.values[i];
    out.vector = clip_nonnegative(std::move(out.vector));
    ++out.iterations;
  }
  return out;
}

SsfIterResult ssf_iter_attack(const NeuralModel& surrogate, std::size_t step,
                              double size, double sigma, Rng& rng) {
  if (!(size > 0.0)) throw std::invalid_argument("ssf-iter: size must be > 0");
  SsfIterResult out;
  out.vector = random_init(kIntervalsPerDay, sigma, rng);
  const Tensor label = theft_label();
  for (std::size_t s = 0; s < step; ++s) {
    const Tensor g = input_gradient(surrogate, out.vector, label);
    ++out.gradient_evals;
    double max_abs = 0.0;
    for (double v : g.values) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs < kVanishingGradient) break;
    const double scale = size / max_abs;
    for (std::size_t i = 0; i < out.vector.size(); ++i)
      out.vector.values[i] += scale * g.values[i];
    out.vector = clip_nonnegative(std::move(out.vector));
  }
  return out;
}

Tensor va1_attack(const Tensor& base_profile, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("va1: alpha must be in (0,1)");
  Tensor a = base_profile;
  for (double& v : a.values) v *= alpha;
  return a;
}

Tensor va2_attack(std::size_t n, double u, Rng& rng) {
  if (!(u > 0.0)) throw std::invalid_argument("va2: u must be > 0");
  Tensor v = Tensor::zeros({n});
  for (double& x : v.values) x = rng.uniform(0.0, u);
  return v;
}

AdversarialBatch generate_batch(const NeuralModel& surrogate,
                                const std::string& surrogate_id,
                                const AttackConfig& config, std::size_t count,
                                const Tensor* normal_pool) {
  if (count == 0) throw std::invalid_argument("generate_batch: count must be >= 1");
  if (config.kind == AttackKind::Va1) {
    if (!normal_pool || normal_pool->rank() != 2 || normal_pool->shape[0] == 0)
      throw std::invalid_argument("generate_batch: va1 needs a pool of normal profiles");
  }
  AdversarialBatch batch;
  batch.config = config;
  batch.surrogate_id = surrogate_id;
  batch.surrogate_hash = model_hash(surrogate);
  batch.vectors = Tensor::zeros({count, kIntervalsPerDay});
  batch.iterations.assign(count, 0);

  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < std::int64_t(count); ++i) {
    try {
      Rng rng(derive_seed(config.seed, std::uint64_t(i)));
      Tensor v;
      std::size_t iters = 0;
      switch (config.kind) {
        case AttackKind::InitOnly:
          v = random_init(kIntervalsPerDay, config.sigma, rng);
          break;
        case AttackKind::Fgsm:
          v = fgsm_attack(surrogate,
                          random_init(kIntervalsPerDay, config.sigma, rng),
                          config.epsilon);
          iters = 1;
          break;
        case AttackKind::Fgv:
          v = fgv_attack(surrogate,
                         random_init(kIntervalsPerDay, config.sigma, rng),
                         config.epsilon);
          iters = 1;
          break;
        case AttackKind::Deepfool: {
          DeepfoolResult r = deepfool_attack(
              surrogate, random_init(kIntervalsPerDay, config.sigma, rng),
              config.max_iter);
          v = std::move(r.vector);
          iters = r.iterations;
          break;
        }
        case AttackKind::SsfIter: {
          SsfIterResult r = ssf_iter_attack(surrogate, config.step, config.size,
                                            config.sigma, rng);
          v = std::move(r.vector);
          iters = r.gradient_evals;
          break;
        }
        case AttackKind::Va1: {
          const std::size_t row = rng.bounded(normal_pool->shape[0]);
          Tensor base({kIntervalsPerDay},
                      std::vector<double>(
                          normal_pool->data() + row * kIntervalsPerDay,
                          normal_pool->data() + (row + 1) * kIntervalsPerDay));
          v = va1_attack(base, config.alpha);
          break;
        }
        case AttackKind::Va2:
          v = va2_attack(kIntervalsPerDay, config.u, rng);
          break;
      }
      std::memcpy(batch.vectors.values.data() + std::size_t(i) * kIntervalsPerDay,
                  v.data(), kIntervalsPerDay * sizeof(double));
      batch.iterations[std::size_t(i)] = iters;
    } catch (const std::exception& e) {
#pragma omp critical
      if (error.empty())
        error = "vector " + std::to_string(i) + ": " + e.what();
    }
  }
  if (!error.empty())
    throw std::runtime_error("generate_batch(" + attack_kind_name(config.kind) +
                             "): " + error);
  return batch;
}

void save_batch(const AdversarialBatch& batch, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
  for (std::size_t t = 1; t <= kIntervalsPerDay; ++t) {
    char col[8];
    std::snprintf(col, sizeof col, "r%02zu", t);
    out << col << ',';
  }
  out << "kind,iterations\n";
  const std::size_t n = batch.vectors.shape[0];
  char num[40];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < kIntervalsPerDay; ++t) {
      std::snprintf(num, sizeof num, "%.17g", batch.vectors.at(i, t));
      out << num << ',';
    }
    out << attack_kind_name(batch.config.kind) << ',' << batch.iterations[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + csv_path);
  out.close();

  nlohmann::json j;
  j["kind"] = attack_kind_name(batch.config.kind);
  j["epsilon"] = batch.config.epsilon;
  j["step"] = batch.config.step;
  j["size"] = batch.config.size;
  j["sigma"] = batch.config.sigma;
  j["max_iter"] = batch.config.max_iter;
  j["alpha"] = batch.config.alpha;
  j["u"] = batch.config.u;
  j["seed"] = batch.config.seed;
  j["surrogate"] = batch.surrogate_id;
  j["surrogate_hash"] = hex64(batch.surrogate_hash);
  j["count"] = n;
  std::ofstream mo(csv_path + ".meta.json", std::ios::trunc);
  if (!mo) throw std::runtime_error("cannot write " + csv_path + ".meta.json");
  mo << j.dump(2) << '\n';
}

}  // namespace etd
