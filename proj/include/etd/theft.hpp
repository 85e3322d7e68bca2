#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "etd/rng.hpp"

namespace etd {

constexpr std::size_t kIntervalsPerDay = 48;

/// One meter-day: 48 nonnegative half-hourly kWh readings.
using DailyProfile = std::array<double, kIntervalsPerDay>;

enum class TheftKind { H1, H2, H3, H4, H5, H6 };

constexpr std::size_t kTheftKinds = 6;

/// The six false-measurement scenarios:
///   h1: alpha * m_t (one alpha per day)        h4: mean(m)
///   h2: beta_t * m_t (fresh beta per reading)  h5: beta_t * mean(m)
///   h3: zero inside [t_i, t_f]                 h6: reversed reading order
struct TheftScenario {
  TheftKind kind = TheftKind::H1;
  // h1 only; drawn from Uniform(beta_lo, beta_hi) when unset.
  std::optional<double> alpha;
  double beta_lo = 0.1;
  double beta_hi = 0.8;
  // h3 only, 1-based inclusive; drawn when unset (start in [1,42],
  // duration at least 6 intervals).
  std::optional<std::pair<int, int>> interval;
};

std::string theft_kind_name(TheftKind kind);

DailyProfile apply_theft_scenario(const DailyProfile& profile,
                                  const TheftScenario& scenario, Rng& rng);

/// Relative draw weights for dataset pollution; uniform by default.
struct ScenarioMix {
  std::array<double, kTheftKinds> weights{1, 1, 1, 1, 1, 1};
};

TheftKind draw_theft_kind(const ScenarioMix& mix, Rng& rng);

}  // namespace etd
