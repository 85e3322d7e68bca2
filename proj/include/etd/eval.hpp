#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etd/attacks.hpp"
#include "etd/model.hpp"
#include "etd/tensor.hpp"

namespace etd {

struct ExperimentSpec {
  std::string defender_id;
  std::string surrogate_id;  // == defender_id in white-box experiments
  std::vector<AttackConfig> grid;
  std::size_t vectors_per_cell = 1000;
  double normal_mean_l1 = 32.0;  // reference for the L1 fraction columns
  double init_sigma = 1e-4;      // preflight initialization scale
  std::uint64_t seed = 0;
};

struct AttackReportRow {
  std::string setting;   // "white" | "black"
  std::string defender;
  std::string attack;
  double epsilon = 0.0;
  double alpha = 0.0;
  double u = 0.0;
  double sigma = 0.0;
  std::size_t step = 0;
  double size = 0.0;
  std::size_t max_iter = 0;
  double recall = 0.0;
  double bypass = 0.0;       // 1 - recall
  double avg_l1 = 0.0;       // kWh
  double avg_l1_frac = 0.0;  // avg_l1 / normal_mean_l1
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Fraction of batch vectors the defender classifies Theft (all batch rows
/// are adversarial, so this is TP/(TP+FN)).
double measure_recall(const NeuralModel& defender, const AdversarialBatch& batch);

/// Mean per-vector L1 norm in kWh.
double average_l1(const AdversarialBatch& batch);

struct ExperimentContext {
  const NeuralModel* defender = nullptr;
  const NeuralModel* surrogate = nullptr;  // may alias defender (white-box)
  const Tensor* normal_pool = nullptr;     // VA1 base profiles
};

/// Runs the grid: an init-only preflight row first, then one row per cell.
/// Cell k's batch is seeded from (spec.seed, k); grid configs' own seed
/// fields are ignored. Black-box runs assert that the defender's gradient
/// counter never moves during generation.
std::vector<AttackReportRow> run_experiment(const ExperimentSpec& spec,
                                            const ExperimentContext& ctx);

struct DefenseComparisonRow {
  AttackReportRow plain;
  AttackReportRow distilled;
  double bypass_delta = 0.0;  // distilled - plain; negative = mitigated
  double l1_delta = 0.0;
};

struct DefenseComparison {
  std::vector<DefenseComparisonRow> rows;
  std::size_t cells = 0;
  std::size_t reduced_or_equal = 0;   // distilled bypass <= plain bypass
  std::size_t strictly_reduced = 0;
};

/// Per-cell deltas between two reports over the same grid (rows must match
/// by setting, attack, and parameters, in order).
DefenseComparison compare_defenses(const std::vector<AttackReportRow>& plain,
                                   const std::vector<AttackReportRow>& distilled);

enum class ReportFormat { Csv, Json };

/// Stable column order: setting,defender,attack,epsilon,alpha,u,sigma,step,
/// size,max_iter,recall,bypass,avg_l1,avg_l1_frac,n,seed. Byte-identical
/// across emissions of the same rows.
void emit_report(const std::vector<AttackReportRow>& rows, ReportFormat format,
                 const std::string& path);

/// Inverse of the CSV emitter; round-trips exactly.
std::vector<AttackReportRow> parse_report_csv(const std::string& path);

/// One CSV per figure analog (fig2_va1.csv, fig3_fgsm.csv, ...) grouping
/// rows into x=parameter, y=metric series. Files whose attack kind is absent
/// from `rows` are still written header-only, keeping the output set stable.
void write_plot_data(const std::vector<AttackReportRow>& rows,
                     const std::string& dir);

/// Plain-vs-distilled series (fig8/fig9/fig10 analogs) for one defender
/// family comparison set.
void write_defense_plot_data(const DefenseComparison& cmp, const std::string& path);

/// Logarithmic grid 10^lo_exp .. 10^hi_exp with `points` entries.
std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t points);

}  // namespace etd
