#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "etd/tensor.hpp"
#include "etd/theft.hpp"

namespace etd {

struct MeterReading {
  long meter_id = 0;
  long day_index = 0;  // days since the source data's epoch
  int interval = 0;    // 1..48
  double kwh = 0.0;
};

struct ParseResult {
  std::vector<MeterReading> readings;
  std::size_t malformed = 0;
};

/// Parses whitespace-separated records `meter_id code kwh` where
/// code = day_index * 100 + interval. Malformed lines are counted and
/// skipped; more than 50% malformed aborts.
ParseResult parse_raw_readings(std::istream& in);

/// File variant; reads through zlib, so both plain and gzip files work.
ParseResult parse_raw_file(const std::string& path);

/// Keeps only (meter, day) groups with all 48 intervals present and valid;
/// output ordered by (meter, day). When `meter_ids` is given it receives the
/// source meter of each profile (used to keep defender and attacker pools
/// meter-disjoint).
std::vector<DailyProfile> regulate_daily(const std::vector<MeterReading>& readings,
                                         std::vector<long>* meter_ids = nullptr);

struct SynthesisConfig {
  double target_mean_l1 = 32.0;  // kWh per day across the population
  double away_fraction = 0.06;   // share of low-occupancy days (base load only)
};

/// Seeded synthetic normal profiles: base load, morning and evening peaks
/// (evening the larger on average), multiplicative noise, per-household
/// scale. A small share of days are low-occupancy (nobody home: peaks
/// suppressed, a few percent of normal consumption), as in real meter data.
/// Profile i depends only on (seed, i).
std::vector<DailyProfile> synthesize_normal_profiles(std::size_t count,
                                                     std::uint64_t seed,
                                                     const SynthesisConfig& cfg = {});

enum class Provenance { Defender, Attacker };

std::string provenance_name(Provenance p);

struct LabeledDataset {
  Tensor profiles;  // [N, 48]
  Tensor labels;    // [N, 2] one-hot rows; Normal = [1,0], Theft = [0,1]
  Provenance provenance = Provenance::Defender;

  std::size_t rows() const { return profiles.shape.empty() ? 0 : profiles.shape[0]; }
};

constexpr std::size_t kLabelNormal = 0;
constexpr std::size_t kLabelTheft = 1;

/// Samples `total` profiles without replacement, pollutes
/// round(polluted_fraction * total) of them with scenarios drawn from `mix`,
/// one-hot labels them, and shuffles. Deterministic per seed.
LabeledDataset build_labeled_dataset(const std::vector<DailyProfile>& profiles,
                                     std::size_t total, double polluted_fraction,
                                     const ScenarioMix& mix, Provenance provenance,
                                     std::uint64_t seed);

/// Seeded disjoint partition; test gets round(test_fraction * N) rows.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        double test_fraction,
                                                        std::uint64_t seed);

struct DatasetMeta {
  std::uint64_t seed = 0;
  std::size_t total = 0;
  std::size_t polluted = 0;
  ScenarioMix mix;
  Provenance provenance = Provenance::Defender;
};

/// CSV with header r01..r48,label (label values: normal|theft) plus a
/// `<path>.meta.json` sidecar with the generation parameters.
void save_labeled_dataset(const LabeledDataset& ds, const std::string& csv_path,
                          const DatasetMeta& meta);
LabeledDataset load_labeled_dataset(const std::string& csv_path);

/// Mean per-row L1 norm (profiles are nonnegative, so this is the mean
/// daily consumption in kWh).
double mean_l1(const Tensor& profiles);

}  // namespace etd
