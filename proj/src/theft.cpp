#include "etd/theft.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace etd {

std::string theft_kind_name(TheftKind kind) {
  switch (kind) {
    case TheftKind::H1: return "h1";
    case TheftKind::H2: return "h2";
    case TheftKind::H3: return "h3";
    case TheftKind::H4: return "h4";
    case TheftKind::H5: return "h5";
    case TheftKind::H6: return "h6";
  }
  return "?";
}

DailyProfile apply_theft_scenario(const DailyProfile& profile,
                                  const TheftScenario& scenario, Rng& rng) {
  const int n = int(kIntervalsPerDay);
  DailyProfile out{};
  switch (scenario.kind) {
    case TheftKind::H1: {
      const double alpha = scenario.alpha
                               ? *scenario.alpha
                               : rng.uniform(scenario.beta_lo, scenario.beta_hi);
      for (int t = 0; t < n; ++t) out[t] = alpha * profile[t];
      break;
    }
    case TheftKind::H2: {
      for (int t = 0; t < n; ++t)
        out[t] = rng.uniform(scenario.beta_lo, scenario.beta_hi) * profile[t];
      break;
    }
    case TheftKind::H3: {
      int ti, tf;
      if (scenario.interval) {
        ti = scenario.interval->first;
        tf = scenario.interval->second;
        if (ti < 1 || tf < ti || tf > n)
          throw std::invalid_argument("h3: invalid interval bounds");
      } else {
        ti = 1 + int(rng.bounded(42));            // start in [1, 42]
        const int max_len = n - ti + 1;            // at least 7 intervals left
        const int len = 6 + int(rng.bounded(std::uint64_t(max_len - 6 + 1)));
        tf = ti + len - 1;
      }
      out = profile;
      for (int t = ti; t <= tf; ++t) out[t - 1] = 0.0;
      break;
    }
    case TheftKind::H4: {
      const double mean =
          std::accumulate(profile.begin(), profile.end(), 0.0) / double(n);
      out.fill(mean);
      break;
    }
    case TheftKind::H5: {
      const double mean =
          std::accumulate(profile.begin(), profile.end(), 0.0) / double(n);
      for (int t = 0; t < n; ++t)
        out[t] = rng.uniform(scenario.beta_lo, scenario.beta_hi) * mean;
      break;
    }
    case TheftKind::H6: {
      for (int t = 0; t < n; ++t) out[t] = profile[n - 1 - t];
      break;
    }
  }
  return out;
}

TheftKind draw_theft_kind(const ScenarioMix& mix, Rng& rng) {
  double total = 0.0;
  for (double w : mix.weights) {
    if (w < 0.0) throw std::invalid_argument("scenario mix: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("scenario mix: all weights zero");
  const double pick = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < kTheftKinds; ++k) {
    acc += mix.weights[k];
    if (pick < acc) return TheftKind(k);
  }
  return TheftKind::H6;
}

}  // namespace etd
