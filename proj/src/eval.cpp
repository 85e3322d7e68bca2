#include "etd/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "etd/models.hpp"

namespace etd {
namespace {

AttackReportRow make_row(const ExperimentSpec& spec, const AttackConfig& cfg,
                         std::size_t n, double recall, double avg) {
  AttackReportRow row;
  row.setting = spec.defender_id == spec.surrogate_id ? "white" : "black";
  row.defender = spec.defender_id;
  row.attack = attack_kind_name(cfg.kind);
  switch (cfg.kind) {
    case AttackKind::Fgsm:
    case AttackKind::Fgv:
      row.epsilon = cfg.epsilon;
      row.sigma = cfg.sigma;
      break;
    case AttackKind::Deepfool:
      row.sigma = cfg.sigma;
      row.max_iter = cfg.max_iter;
      break;
    case AttackKind::SsfIter:
      row.sigma = cfg.sigma;
      row.step = cfg.step;
      row.size = cfg.size;
      break;
    case AttackKind::Va1:
      row.alpha = cfg.alpha;
      break;
    case AttackKind::Va2:
      row.u = cfg.u;
      break;
    case AttackKind::InitOnly:
      row.sigma = cfg.sigma;
      break;
  }
  row.recall = recall;
  row.bypass = 1.0 - recall;
  row.avg_l1 = avg;
  row.avg_l1_frac = spec.normal_mean_l1 > 0.0 ? avg / spec.normal_mean_l1 : 0.0;
  row.n = n;
  row.seed = cfg.seed;
  return row;
}

}  // namespace

double measure_recall(const NeuralModel& defender, const AdversarialBatch& batch) {
  const std::size_t n = batch.vectors.shape.empty() ? 0 : batch.vectors.shape[0];
  if (n == 0) throw std::invalid_argument("measure_recall: empty batch");
  const std::vector<std::size_t> pred = classify(defender, batch.vectors);
  std::size_t detected = 0;
  for (std::size_t p : pred)
    if (p == kLabelTheft) ++detected;
  return double(detected) / double(n);
}

double average_l1(const AdversarialBatch& batch) {
  const std::size_t n = batch.vectors.shape.empty() ? 0 : batch.vectors.shape[0];
  if (n == 0) throw std::invalid_argument("average_l1: empty batch");
  double total = 0.0;
  for (double v : batch.vectors.values) total += std::abs(v);
  return total / double(n);
}

std::vector<AttackReportRow> run_experiment(const ExperimentSpec& spec,
                                            const ExperimentContext& ctx) {
  if (!ctx.defender || !ctx.surrogate)
    throw std::invalid_argument("run_experiment: missing model");
  if (spec.vectors_per_cell == 0)
    throw std::invalid_argument("run_experiment: vectors_per_cell must be >= 1");
  const bool black = spec.defender_id != spec.surrogate_id;

  std::vector<AttackReportRow> rows;
  if (spec.grid.empty()) return rows;
  auto run_cell = [&](const AttackConfig& cfg, const std::string& cell) {
    const std::uint64_t before = ctx.defender->gradient_queries->load();
    AdversarialBatch batch;
    try {
      batch = generate_batch(*ctx.surrogate, spec.surrogate_id, cfg,
                             spec.vectors_per_cell, ctx.normal_pool);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_experiment: " + cell + " vs " + spec.defender_id +
                               ": " + e.what());
    }
    if (black && ctx.defender->gradient_queries->load() != before)
      throw std::logic_error("run_experiment: black-box " + cell +
                             " queried defender gradients");
    rows.push_back(make_row(spec, cfg, spec.vectors_per_cell,
                            measure_recall(*ctx.defender, batch),
                            average_l1(batch)));
  };

  // Preflight: the random-initialization baseline every sweep records.
  AttackConfig init_cfg;
  init_cfg.kind = AttackKind::InitOnly;
  init_cfg.sigma = spec.init_sigma;
  init_cfg.seed = derive_seed(spec.seed, 0);
  run_cell(init_cfg, "preflight (init-only)");

  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    AttackConfig cfg = spec.grid[k];
    cfg.seed = derive_seed(spec.seed, k + 1);
    run_cell(cfg, "cell " + std::to_string(k) + " (" + attack_kind_name(cfg.kind) + ")");
  }
  return rows;
}

DefenseComparison compare_defenses(const std::vector<AttackReportRow>& plain,
                                   const std::vector<AttackReportRow>& distilled) {
  if (plain.size() != distilled.size())
    throw std::invalid_argument("compare_defenses: reports have different cell counts");
  DefenseComparison cmp;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const AttackReportRow& a = plain[i];
    const AttackReportRow& b = distilled[i];
    const bool same_cell = a.setting == b.setting && a.attack == b.attack &&
                           a.epsilon == b.epsilon && a.alpha == b.alpha &&
                           a.u == b.u && a.sigma == b.sigma && a.step == b.step &&
                           a.size == b.size && a.max_iter == b.max_iter;
    if (!same_cell)
      throw std::invalid_argument("compare_defenses: grid mismatch at cell " +
                                  std::to_string(i));
    DefenseComparisonRow row;
    row.plain = a;
    row.distilled = b;
    row.bypass_delta = b.bypass - a.bypass;
    row.l1_delta = b.avg_l1 - a.avg_l1;
    cmp.rows.push_back(row);
    ++cmp.cells;
    if (b.bypass <= a.bypass) {
      ++cmp.reduced_or_equal;
      if (b.bypass < a.bypass) ++cmp.strictly_reduced;
    }
  }
  return cmp;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t points) {
  if (points == 0) return {};
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(std::pow(10.0, lo_exp));
    return out;
  }
  for (std::size_t i = 0; i < points; ++i)
    out.push_back(std::pow(
        10.0, lo_exp + (hi_exp - lo_exp) * double(i) / double(points - 1)));
  return out;
}

}  // namespace etd
