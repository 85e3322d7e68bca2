#include "etd/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace etd {
namespace {

// One record: `meter_id code kwh`, code = day_index * 100 + interval.
bool parse_line(const char* s, MeterReading& out) {
  char* end = nullptr;
  errno = 0;
  const long meter = std::strtol(s, &end, 10);
  if (end == s || errno != 0) return false;
  const char* p = end;
  const long code = std::strtol(p, &end, 10);
  if (end == p || errno != 0 || code <= 0) return false;
  p = end;
  const double kwh = std::strtod(p, &end);
  if (end == p || errno != 0) return false;
  for (p = end; *p != '\0'; ++p)
    if (!std::isspace(static_cast<unsigned char>(*p))) return false;
  const int interval = int(code % 100);
  if (interval < 1 || interval > int(kIntervalsPerDay)) return false;
  if (!(kwh >= 0.0) || !std::isfinite(kwh)) return false;
  out.meter_id = meter;
  out.day_index = code / 100;
  out.interval = interval;
  out.kwh = kwh;
  return true;
}

bool blank_line(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

void finish_parse(ParseResult& result, std::size_t lines) {
  if (lines > 0 && result.malformed * 2 > lines)
    throw std::runtime_error("raw readings: " + std::to_string(result.malformed) +
                             " of " + std::to_string(lines) +
                             " lines malformed; input does not look like "
                             "`meter_id code kwh` records");
}

}  // namespace

ParseResult parse_raw_readings(std::istream& in) {
  ParseResult result;
  std::size_t lines = 0;
  std::string line;
  MeterReading r;
  while (std::getline(in, line)) {
    if (blank_line(line)) continue;
    ++lines;
    if (parse_line(line.c_str(), r))
      result.readings.push_back(r);
    else
      ++result.malformed;
  }
  if (in.bad()) throw std::runtime_error("raw readings: stream read failure");
  finish_parse(result, lines);
  return result;
}

ParseResult parse_raw_file(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw std::runtime_error("cannot open " + path);
  ParseResult result;
  std::size_t lines = 0;
  std::string carry;
  std::vector<char> buf(1 << 20);
  MeterReading r;
  auto consume = [&](const std::string& line) {
    if (blank_line(line)) return;
    ++lines;
    if (parse_line(line.c_str(), r))
      result.readings.push_back(r);
    else
      ++result.malformed;
  };
  int got;
  while ((got = gzread(gz, buf.data(), unsigned(buf.size()))) > 0) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < std::size_t(got); ++i) {
      if (buf[i] != '\n') continue;
      carry.append(buf.data() + start, i - start);
      consume(carry);
      carry.clear();
      start = i + 1;
    }
    carry.append(buf.data() + start, std::size_t(got) - start);
  }
  const bool read_error = got < 0;
  gzclose(gz);
  if (read_error) throw std::runtime_error("read failure on " + path);
  if (!carry.empty()) consume(carry);
  finish_parse(result, lines);
  return result;
}

std::vector<DailyProfile> regulate_daily(const std::vector<MeterReading>& readings,
                                         std::vector<long>* meter_ids) {
  struct Day {
    DailyProfile values{};
    std::uint64_t present = 0;
    bool bad = false;
  };
  std::map<std::pair<long, long>, Day> days;
  for (const MeterReading& r : readings) {
    if (r.interval < 1 || r.interval > int(kIntervalsPerDay)) continue;
    Day& d = days[{r.meter_id, r.day_index}];
    if (!(r.kwh >= 0.0) || !std::isfinite(r.kwh)) {
      d.bad = true;
      continue;
    }
    d.values[std::size_t(r.interval - 1)] = r.kwh;
    d.present |= std::uint64_t(1) << (r.interval - 1);
  }
  const std::uint64_t all = (std::uint64_t(1) << kIntervalsPerDay) - 1;
  std::vector<DailyProfile> out;
  if (meter_ids != nullptr) meter_ids->clear();
  for (const auto& [key, d] : days) {
    if (d.bad || d.present != all) continue;
    out.push_back(d.values);
    if (meter_ids != nullptr) meter_ids->push_back(key.first);
  }
  return out;
}

std::vector<DailyProfile> synthesize_normal_profiles(std::size_t count,
                                                     std::uint64_t seed,
                                                     const SynthesisConfig& cfg) {
  if (!(cfg.away_fraction >= 0.0 && cfg.away_fraction <= 1.0))
    throw std::invalid_argument("synthesize_normal_profiles: away_fraction must be in [0,1]");
  // Low-occupancy days consume a small multiple of a normal day; the divisor
  // keeps the population mean L1 at the configured target. 0.07 is the mean
  // of the occupancy draw below.
  const double mean_scale = 1.0 - cfg.away_fraction * (1.0 - 0.07);
  std::vector<DailyProfile> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    const bool away = rng.uniform01() < cfg.away_fraction;
    const double base = 0.2 + 0.2 * rng.uniform01();
    double morning_amp = 0.5 + 0.7 * rng.uniform01();
    const double morning_center = 14.0 + 4.0 * rng.uniform01();  // ~7-9 am
    const double morning_width = 2.0 + 2.0 * rng.uniform01();
    double evening_amp = 1.0 + 1.4 * rng.uniform01();
    const double evening_center = 35.0 + 5.0 * rng.uniform01();  // ~17:30-20
    const double evening_width = 3.0 + 3.0 * rng.uniform01();
    double occupancy = 1.0;
    if (away) {
      // Nobody home: fridge and standby only, the odd timer or remote device.
      const double damp = 0.25 * rng.uniform01();
      morning_amp *= damp;
      evening_amp *= damp;
      occupancy = 0.03 + 0.09 * rng.uniform01();
    }
    DailyProfile& p = out[i];
    double l1 = 0.0;
    for (std::size_t t = 0; t < kIntervalsPerDay; ++t) {
      const double dm = (double(t) - morning_center) / morning_width;
      const double de = (double(t) - evening_center) / evening_width;
      double v = base + morning_amp * std::exp(-0.5 * dm * dm) +
                 evening_amp * std::exp(-0.5 * de * de);
      v *= 1.0 + 0.15 * rng.normal(0.0, 1.0);
      p[t] = std::max(v, 0.0);
      l1 += p[t];
    }
    // Household scale with unit mean, so the population mean L1 equals the
    // configured target.
    const double scale = cfg.target_mean_l1 * occupancy *
                         std::exp(rng.normal(-0.045, 0.3)) / (l1 * mean_scale);
    for (double& v : p) v *= scale;
  }
  return out;
}

std::string provenance_name(Provenance p) {
  return p == Provenance::Defender ? "defender" : "attacker";
}

LabeledDataset build_labeled_dataset(const std::vector<DailyProfile>& profiles,
                                     std::size_t total, double polluted_fraction,
                                     const ScenarioMix& mix, Provenance provenance,
                                     std::uint64_t seed) {
  if (total == 0) throw std::invalid_argument("build_labeled_dataset: total must be >= 1");
  if (!(polluted_fraction >= 0.0 && polluted_fraction <= 1.0))
    throw std::invalid_argument("build_labeled_dataset: fraction must be in [0,1]");
  if (profiles.size() < total)
    throw std::invalid_argument("build_labeled_dataset: need " + std::to_string(total) +
                                " source profiles, have " +
                                std::to_string(profiles.size()));
  Rng sample_rng(derive_seed(seed, 0));
  Rng scenario_rng(derive_seed(seed, 1));
  Rng shuffle_rng(derive_seed(seed, 2));

  // Sample `total` source rows without replacement.
  std::vector<std::size_t> idx(profiles.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t j = i + sample_rng.bounded(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }

  const auto polluted = std::size_t(std::llround(polluted_fraction * double(total)));
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = total - 1; i > 0; --i) {
    const std::size_t j = shuffle_rng.bounded(i + 1);
    std::swap(perm[i], perm[j]);
  }

  LabeledDataset ds;
  ds.provenance = provenance;
  ds.profiles = Tensor::zeros({total, kIntervalsPerDay});
  ds.labels = Tensor::zeros({total, 2});
  for (std::size_t r = 0; r < total; ++r) {
    const DailyProfile& src = profiles[idx[r]];
    DailyProfile row;
    std::size_t label;
    if (r < polluted) {
      TheftScenario scenario;
      scenario.kind = draw_theft_kind(mix, scenario_rng);
      row = apply_theft_scenario(src, scenario, scenario_rng);
      label = kLabelTheft;
    } else {
      row = src;
      label = kLabelNormal;
    }
    const std::size_t at = perm[r];
    std::copy(row.begin(), row.end(),
              ds.profiles.values.begin() + long(at * kIntervalsPerDay));
    ds.labels.at(at, label) = 1.0;
  }
  return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        double test_fraction,
                                                        std::uint64_t seed) {
  const std::size_t n = ds.rows();
  if (n == 0) throw std::invalid_argument("split_dataset: empty dataset");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.bounded(i + 1);
    std::swap(perm[i], perm[j]);
  }
  const auto test_n = std::size_t(std::llround(test_fraction * double(n)));
  if (test_n == 0 || test_n == n)
    throw std::invalid_argument("split_dataset: " + std::to_string(n) +
                                " rows at fraction " + std::to_string(test_fraction) +
                                " leaves one side empty");
  auto take = [&](std::size_t from, std::size_t count) {
    LabeledDataset part;
    part.provenance = ds.provenance;
    part.profiles = Tensor::zeros({count, kIntervalsPerDay});
    part.labels = Tensor::zeros({count, 2});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t row = perm[from + i];
      std::copy_n(ds.profiles.data() + row * kIntervalsPerDay, kIntervalsPerDay,
                  part.profiles.values.begin() + long(i * kIntervalsPerDay));
      std::copy_n(ds.labels.data() + row * 2, 2,
                  part.labels.values.begin() + long(i * 2));
    }
    return part;
  };
  return {take(test_n, n - test_n), take(0, test_n)};
}

void save_labeled_dataset(const LabeledDataset& ds, const std::string& csv_path,
                          const DatasetMeta& meta) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
  for (std::size_t t = 1; t <= kIntervalsPerDay; ++t) {
    char col[8];
    std::snprintf(col, sizeof col, "r%02zu", t);
    out << col << ',';
  }
  out << "label\n";
  char num[40];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t t = 0; t < kIntervalsPerDay; ++t) {
      std::snprintf(num, sizeof num, "%.17g", ds.profiles.at(i, t));
      out << num << ',';
    }
    out << (ds.labels.at(i, kLabelTheft) == 1.0 ? "theft" : "normal") << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + csv_path);
  out.close();

  nlohmann::json j;
  j["seed"] = meta.seed;
  j["total"] = meta.total;
  j["polluted"] = meta.polluted;
  j["provenance"] = provenance_name(meta.provenance);
  nlohmann::json mix;
  for (std::size_t k = 0; k < kTheftKinds; ++k)
    mix[theft_kind_name(TheftKind(k))] = meta.mix.weights[k];
  j["scenario_mix"] = mix;
  std::ofstream mo(csv_path + ".meta.json", std::ios::trunc);
  if (!mo) throw std::runtime_error("cannot write " + csv_path + ".meta.json");
  mo << j.dump(2) << '\n';
}

LabeledDataset load_labeled_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(csv_path + ": empty dataset file");
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (blank_line(line)) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    for (std::size_t t = 0; t < kIntervalsPerDay; ++t) {
      const double v = std::strtod(p, &end);
      if (end == p || *end != ',')
        throw std::runtime_error(csv_path + ": malformed row " +
                                 std::to_string(rows + 1));
      values.push_back(v);
      p = end + 1;
    }
    if (std::strncmp(p, "theft", 5) == 0) {
      labels.push_back(0.0);
      labels.push_back(1.0);
    } else if (std::strncmp(p, "normal", 6) == 0) {
      labels.push_back(1.0);
      labels.push_back(0.0);
    } else {
      throw std::runtime_error(csv_path + ": bad label on row " +
                               std::to_string(rows + 1));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(csv_path + ": no data rows");
  LabeledDataset ds;
  ds.profiles = Tensor({rows, kIntervalsPerDay}, std::move(values));
  ds.labels = Tensor({rows, 2}, std::move(labels));
  return ds;
}

double mean_l1(const Tensor& profiles) {
  if (profiles.rank() != 2 || profiles.shape[0] == 0)
    throw std::invalid_argument("mean_l1: expected a nonempty [N,48] tensor");
  const std::size_t n = profiles.shape[0];
  double total = 0.0;
  for (double v : profiles.values) total += std::abs(v);
  return total / double(n);
}

}  // namespace etd
