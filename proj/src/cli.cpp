#include "etd/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "etd/attacks.hpp"
#include "etd/data.hpp"
#include "etd/eval.hpp"
#include "etd/models.hpp"
#include "etd/rng.hpp"
#include "etd/serialize.hpp"
#include "etd/theft.hpp"
#include "etd/train.hpp"

namespace etd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Upstream artifact absent (or bad flags pointing nowhere): exit code 1.
struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::uint64_t seed = 7;
  int jobs = 0;
  bool force = false;
  std::string workdir = "work";
  std::string out;  // empty -> <workdir>/reports
  std::string data_in;
  bool raw = false;
  // dataset scale
  std::size_t count = 50000;
  std::size_t rows = 20000;
  double polluted_fraction = 0.5;
  double target_mean_l1 = 32.0;
  double test_fraction = 0.2;
  // model scale / training
  double width_scale = 0.25;
  std::size_t epochs = 10;
  std::size_t epochs_fnn = 0;  // 0 -> inherit --epochs
  std::size_t epochs_cnn = 0;
  std::size_t epochs_rnn = 0;
  double learning_rate = 1e-3;
  std::size_t batch = 128;
  double temperature = 100.0;
  // attack grids
  std::size_t vectors = 1000;
  double sigma = 1e-4;
  std::size_t max_iter = 100;
  std::string eps_grid = "-2:0.5:15";
  std::string size_grid = "-3:0:8";
  std::string step_grid = "1,3,7,15,30";
  std::size_t step_max = 0;  // >0 -> steps 1..step_max (full heatmap)
  std::string alpha_grid = "0.1:0.9:9";
  std::string u_grid = "-1:1:7";
  // ad-hoc `attack` run
  std::string attack_kind = "ssf-iter";
  std::string surrogate = "fnn-attacker";
  std::size_t attack_count = 100;
  double epsilon = 0.1;
  std::size_t step = 10;
  double size = 0.1;
  double alpha = 0.5;
  double u = 1.0;
};

std::string fmt17(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string fmtg(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%g", v);
  return b;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s, const char* what) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument(std::string(what) + ": bad count '" + s + "'");
  return std::size_t(v);
}

// "lo:hi:points" with decade exponents, e.g. "-2:0.5:15".
std::vector<double> parse_log_grid_spec(const std::string& s, const char* what) {
  const auto parts = split_on(s, ':');
  if (parts.size() != 3)
    throw std::invalid_argument(std::string(what) + ": expected lo_exp:hi_exp:points, got '" + s + "'");
  const double lo = parse_double(parts[0], what);
  const double hi = parse_double(parts[1], what);
  const std::size_t n = parse_size(parts[2], what);
  if (n == 0) throw std::invalid_argument(std::string(what) + ": needs at least one point");
  return log_grid(lo, hi, n);
}

// "lo:hi:points" linear, e.g. "0.1:0.9:9".
std::vector<double> parse_linear_grid_spec(const std::string& s, const char* what) {
  const auto parts = split_on(s, ':');
  if (parts.size() != 3)
    throw std::invalid_argument(std::string(what) + ": expected lo:hi:points, got '" + s + "'");
  const double lo = parse_double(parts[0], what);
  const double hi = parse_double(parts[1], what);
  const std::size_t n = parse_size(parts[2], what);
  if (n == 0) throw std::invalid_argument(std::string(what) + ": needs at least one point");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  return g;
}

std::vector<std::size_t> ssf_steps(const Settings& s) {
  std::vector<std::size_t> steps;
  if (s.step_max > 0) {
    for (std::size_t k = 1; k <= s.step_max; ++k) steps.push_back(k);
    return steps;
  }
  for (const std::string& part : split_on(s.step_grid, ',')) {
    const std::size_t v = parse_size(part, "--step-grid");
    if (v == 0) throw std::invalid_argument("--step-grid: steps must be >= 1");
    steps.push_back(v);
  }
  if (steps.empty()) throw std::invalid_argument("--step-grid: empty");
  return steps;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) t += ',';
    t += fmt17(v[i]);
  }
  return t;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) t += ',';
    t += std::to_string(v[i]);
  }
  return t;
}

// ---- config hashing: each stage names its outputs after the fnv of its
// ---- canonical key=value text, so identical configs collide on purpose.

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string kv_text(const KeyValues& kv) {
  std::string t;
  for (const auto& [k, v] : kv) {
    t += k;
    t += '=';
    t += v;
    t += '\n';
  }
  return t;
}

std::string kv_hash(const KeyValues& kv) { return hex64(fnv1a64(kv_text(kv))); }

json kv_json(const KeyValues& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

constexpr std::array<Family, 3> kFamilies{Family::Fnn, Family::Cnn, Family::Rnn};

std::size_t epochs_for(const Settings& s, Family f) {
  const std::size_t e = f == Family::Fnn   ? s.epochs_fnn
                        : f == Family::Cnn ? s.epochs_cnn
                                           : s.epochs_rnn;
  return e > 0 ? e : s.epochs;
}

KeyValues prepare_kv(const Settings& s) {
  KeyValues kv;
  kv.emplace_back("stage", "prepare-data");
  kv.emplace_back("source", s.raw ? "raw:" + s.data_in : std::string("synthetic"));
  if (!s.raw) kv.emplace_back("count", std::to_string(s.count));
  kv.emplace_back("rows", std::to_string(s.rows));
  kv.emplace_back("polluted-fraction", fmt17(s.polluted_fraction));
  kv.emplace_back("target-mean-l1", fmt17(s.target_mean_l1));
  kv.emplace_back("seed", std::to_string(s.seed));
  return kv;
}

KeyValues train_kv(const Settings& s) {
  KeyValues kv;
  kv.emplace_back("stage", "train");
  kv.emplace_back("data", kv_hash(prepare_kv(s)));
  kv.emplace_back("width-scale", fmt17(s.width_scale));
  kv.emplace_back("epochs-fnn", std::to_string(epochs_for(s, Family::Fnn)));
  kv.emplace_back("epochs-cnn", std::to_string(epochs_for(s, Family::Cnn)));
  kv.emplace_back("epochs-rnn", std::to_string(epochs_for(s, Family::Rnn)));
  kv.emplace_back("lr", fmt17(s.learning_rate));
  kv.emplace_back("batch", std::to_string(s.batch));
  kv.emplace_back("test-fraction", fmt17(s.test_fraction));
  kv.emplace_back("seed", std::to_string(s.seed));
  return kv;
}

KeyValues distill_kv(const Settings& s) {
  KeyValues kv;
  kv.emplace_back("stage", "distill");
  kv.emplace_back("train", kv_hash(train_kv(s)));
  kv.emplace_back("temperature", fmt17(s.temperature));
  kv.emplace_back("seed", std::to_string(s.seed));
  return kv;
}

KeyValues evaluate_kv(const Settings& s, const std::string& distill_hash) {
  KeyValues kv;
  kv.emplace_back("stage", "evaluate");
  kv.emplace_back("train", kv_hash(train_kv(s)));
  kv.emplace_back("distill", distill_hash);  // "none" when no distilled models
  kv.emplace_back("vectors", std::to_string(s.vectors));
  kv.emplace_back("sigma", fmt17(s.sigma));
  kv.emplace_back("max-iter", std::to_string(s.max_iter));
  kv.emplace_back("eps-grid", join_doubles(parse_log_grid_spec(s.eps_grid, "--eps-grid")));
  kv.emplace_back("alpha-grid", join_doubles(parse_linear_grid_spec(s.alpha_grid, "--alpha-grid")));
  kv.emplace_back("u-grid", join_doubles(parse_log_grid_spec(s.u_grid, "--u-grid")));
  kv.emplace_back("step-grid", join_sizes(ssf_steps(s)));
  kv.emplace_back("size-grid", join_doubles(parse_log_grid_spec(s.size_grid, "--size-grid")));
  kv.emplace_back("seed", std::to_string(s.seed));
  return kv;
}

fs::path wpath(const Settings& s, const std::string& name) {
  return fs::path(s.workdir) / name;
}

std::string out_dir(const Settings& s) {
  return s.out.empty() ? (fs::path(s.workdir) / "reports").string() : s.out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream outf(p, std::ios::binary);
  if (!outf) throw std::runtime_error("cannot write " + p.string());
  outf << text;
  outf.close();
  if (!outf) throw std::runtime_error("short write to " + p.string());
}

void write_json_file(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingInput("cannot read " + p.string());
  return json::parse(in);
}

void update_manifest(const Settings& s, const std::string& stage, const KeyValues& kv,
                     const std::string& hash, const std::vector<std::string>& outputs) {
  const fs::path p = wpath(s, "manifest.json");
  json m = json::object();
  if (fs::exists(p)) {
    try {
      m = read_json_file(p);
    } catch (const std::exception&) {
      m = json::object();
    }
    if (!m.is_object()) m = json::object();
  }
  json entry;
  entry["config"] = kv_json(kv);
  entry["hash"] = hash;
  entry["outputs"] = outputs;  // basenames, so parallel workdirs stay comparable
  m[stage] = entry;
  write_json_file(p, m);
}

bool all_exist(const std::vector<fs::path>& paths) {
  for (const fs::path& p : paths)
    if (!fs::exists(p)) return false;
  return true;
}

std::vector<std::string> basenames(const std::vector<fs::path>& paths) {
  std::vector<std::string> names;
  names.reserve(paths.size());
  for (const fs::path& p : paths) names.push_back(p.filename().string());
  return names;
}

LabeledDataset load_dataset_checked(const fs::path& p, Provenance prov, const char* hint) {
  if (!fs::exists(p))
    throw MissingInput("missing " + p.string() + "; run " + hint +
                       " first with the same data flags");
  LabeledDataset ds = load_labeled_dataset(p.string());
  ds.provenance = prov;
  return ds;
}

NeuralModel load_model_checked(const fs::path& p, const char* hint) {
  if (!fs::exists(p))
    throw MissingInput("missing " + p.string() + "; run " + hint +
                       " first with the same model flags");
  return load_model(p.string());
}

Tensor normal_rows(const LabeledDataset& ds) {
  const std::size_t n = ds.rows();
  std::vector<double> vals;
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.labels.at(i, kLabelNormal) != 1.0) continue;
    const double* row = ds.profiles.data() + i * kIntervalsPerDay;
    vals.insert(vals.end(), row, row + kIntervalsPerDay);
    ++m;
  }
  if (m == 0) throw std::runtime_error("dataset has no normal rows to pool");
  return Tensor({m, kIntervalsPerDay}, std::move(vals));
}

double pool_mean_l1(const std::vector<DailyProfile>& pool) {
  double acc = 0.0;
  for (const DailyProfile& p : pool)
    for (double v : p) acc += v;
  return pool.empty() ? 0.0 : acc / double(pool.size());
}

// ---- stages ---------------------------------------------------------------

int stage_prepare(const Settings& s) {
  fs::create_directories(s.workdir);
  const KeyValues kv = prepare_kv(s);
  const std::string h = kv_hash(kv);
  const fs::path def_csv = wpath(s, "dataset-defender-" + h + ".csv");
  const fs::path att_csv = wpath(s, "dataset-attacker-" + h + ".csv");
  if (!s.force && all_exist({def_csv, att_csv})) {
    std::printf("prepare-data: cache hit %s\n", h.c_str());
    update_manifest(s, "prepare-data", kv, h, basenames({def_csv, att_csv}));
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<DailyProfile> def_pool;
  std::vector<DailyProfile> att_pool;
  if (s.raw) {
    if (s.data_in.empty()) throw MissingInput("--raw needs --data-in <readings file>");
    if (!fs::exists(s.data_in))
      throw MissingInput("raw readings file not found: " + s.data_in);
    const ParseResult pr = parse_raw_file(s.data_in);
    std::vector<long> meters;
    const std::vector<DailyProfile> all = regulate_daily(pr.readings, &meters);
    std::vector<long> distinct;
    for (long m : meters)
      if (distinct.empty() || distinct.back() != m) distinct.push_back(m);
    if (distinct.size() < 2)
      throw MissingInput("raw data holds fewer than two meters; cannot split pools");
    // Defender and attacker draw from disjoint meter sets.
    const long pivot = distinct[distinct.size() / 2];
    for (std::size_t i = 0; i < all.size(); ++i)
      (meters[i] < pivot ? def_pool : att_pool).push_back(all[i]);
    std::printf("prepare-data: %zu readings (%zu malformed), %zu complete days, %zu meters, mean L1 %.3f kWh\n",
                pr.readings.size(), pr.malformed, all.size(), distinct.size(),
                pool_mean_l1(all));
  } else {
    SynthesisConfig sc;
    sc.target_mean_l1 = s.target_mean_l1;
    std::vector<DailyProfile> all =
        synthesize_normal_profiles(s.count, derive_seed(s.seed, 10), sc);
    const std::size_t half = all.size() / 2;
    def_pool.assign(all.begin(), all.begin() + std::ptrdiff_t(half));
    att_pool.assign(all.begin() + std::ptrdiff_t(half), all.end());
    std::printf("prepare-data: %zu synthetic profiles, mean L1 %.3f kWh\n", all.size(),
                pool_mean_l1(all));
  }
  if (def_pool.size() < s.rows || att_pool.size() < s.rows)
    throw MissingInput("pools too small for --rows " + std::to_string(s.rows) +
                       " (defender " + std::to_string(def_pool.size()) + ", attacker " +
                       std::to_string(att_pool.size()) + " profiles)");

  const ScenarioMix mix;
  const std::uint64_t def_seed = derive_seed(s.seed, 11);
  const std::uint64_t att_seed = derive_seed(s.seed, 12);
  const LabeledDataset def_ds = build_labeled_dataset(def_pool, s.rows, s.polluted_fraction,
                                                      mix, Provenance::Defender, def_seed);
  const LabeledDataset att_ds = build_labeled_dataset(att_pool, s.rows, s.polluted_fraction,
                                                      mix, Provenance::Attacker, att_seed);
  DatasetMeta meta;
  meta.total = s.rows;
  meta.polluted = std::size_t(std::llround(s.polluted_fraction * double(s.rows)));
  meta.mix = mix;
  meta.seed = def_seed;
  meta.provenance = Provenance::Defender;
  save_labeled_dataset(def_ds, def_csv.string(), meta);
  meta.seed = att_seed;
  meta.provenance = Provenance::Attacker;
  save_labeled_dataset(att_ds, att_csv.string(), meta);

  std::printf("prepare-data: wrote %s and %s (%zu rows each, %zu polluted)\n",
              def_csv.string().c_str(), att_csv.string().c_str(), s.rows, meta.polluted);
  std::fprintf(stderr, "prepare-data: %.1fs\n", elapsed_s(t0));
  update_manifest(s, "prepare-data", kv, h, basenames({def_csv, att_csv}));
  return 0;
}

struct SplitSets {
  LabeledDataset def_train, def_test, att_train, att_test;
};

SplitSets load_splits(const Settings& s) {
  const std::string hd = kv_hash(prepare_kv(s));
  const LabeledDataset def_ds = load_dataset_checked(
      wpath(s, "dataset-defender-" + hd + ".csv"), Provenance::Defender, "prepare-data");
  const LabeledDataset att_ds = load_dataset_checked(
      wpath(s, "dataset-attacker-" + hd + ".csv"), Provenance::Attacker, "prepare-data");
  SplitSets sets;
  auto def_split = split_dataset(def_ds, s.test_fraction, derive_seed(s.seed, 13));
  auto att_split = split_dataset(att_ds, s.test_fraction, derive_seed(s.seed, 14));
  sets.def_train = std::move(def_split.first);
  sets.def_test = std::move(def_split.second);
  sets.att_train = std::move(att_split.first);
  sets.att_test = std::move(att_split.second);
  return sets;
}

void write_model_sidecar(const fs::path& model_path, const std::string& id,
                         const NeuralModel& model, const KeyValues& kv,
                         std::uint64_t train_seed) {
  json j;
  j["config"] = kv_json(kv);
  j["id"] = id;
  j["parameters-hash"] = hex64(model_hash(model));
  j["train-seed"] = std::to_string(train_seed);
  write_json_file(fs::path(model_path.string() + ".meta.json"), j);
}

int stage_train(const Settings& s) {
  fs::create_directories(s.workdir);
  const KeyValues kv = train_kv(s);
  const std::string h = kv_hash(kv);
  const fs::path metrics_csv = wpath(s, "metrics-" + h + ".csv");

  std::vector<fs::path> outputs{metrics_csv};
  std::vector<ArchitectureId> archs;
  for (Family f : kFamilies)
    for (Side side : {Side::Defender, Side::Attacker}) {
      const ArchitectureId arch{f, side, s.width_scale};
      archs.push_back(arch);
      outputs.push_back(wpath(s, "model-" + model_id(arch) + "-" + h + ".etdm"));
    }
  if (!s.force && all_exist(outputs)) {
    std::printf("train: cache hit %s\n", h.c_str());
    update_manifest(s, "train", kv, h, basenames(outputs));
    return 0;
  }

  const SplitSets sets = load_splits(s);
  std::string csv = "model_id,accuracy,fpr,recall,seed\n";
  for (std::size_t k = 0; k < archs.size(); ++k) {
    const ArchitectureId& arch = archs[k];
    const std::string id = model_id(arch);
    const bool defender = arch.side == Side::Defender;
    const LabeledDataset& tr = defender ? sets.def_train : sets.att_train;
    const LabeledDataset& te = defender ? sets.def_test : sets.att_test;

    const auto t0 = std::chrono::steady_clock::now();
    NeuralModel net = build_model(arch, derive_seed(s.seed, 20 + k));
    TrainConfig tc;
    tc.learning_rate = s.learning_rate;
    tc.epochs = epochs_for(s, arch.family);
    tc.batch_size = s.batch;
    tc.seed = derive_seed(s.seed, 30 + k);
    const std::uint64_t train_seed = tc.seed;
    const TrainResult res = train(net, tr.profiles, tr.labels, tc);
    const ClassifierMetrics m = evaluate_classifier(res.model, te);

    const fs::path mp = outputs[1 + k];
    save_model(res.model, mp.string());
    write_model_sidecar(mp, id, res.model, kv, train_seed);
    csv += id + "," + fmt17(m.accuracy) + "," + fmt17(m.false_positive_rate) + "," +
           fmt17(m.recall) + "," + std::to_string(s.seed) + "\n";
    std::printf("train: %s acc=%.4f fpr=%.4f recall=%.4f loss %.4f->%.4f\n", id.c_str(),
                m.accuracy, m.false_positive_rate, m.recall,
                res.epoch_losses.empty() ? 0.0 : res.epoch_losses.front(),
                res.epoch_losses.empty() ? 0.0 : res.epoch_losses.back());
    std::fprintf(stderr, "train: %s %zu epochs in %.1fs\n", id.c_str(), tc.epochs,
                 elapsed_s(t0));
  }
  write_text(metrics_csv, csv);
  update_manifest(s, "train", kv, h, basenames(outputs));
  return 0;
}

int stage_distill(const Settings& s) {
  fs::create_directories(s.workdir);
  const KeyValues kv = distill_kv(s);
  const std::string h = kv_hash(kv);
  const fs::path metrics_csv = wpath(s, "metrics-distilled-" + h + ".csv");

  std::vector<fs::path> outputs{metrics_csv};
  for (Family f : kFamilies) {
    const ArchitectureId arch{f, Side::Defender, s.width_scale};
    outputs.push_back(wpath(s, "model-" + model_id(arch) + "-distilled-" + h + ".etdm"));
  }
  if (!s.force && all_exist(outputs)) {
    std::printf("distill: cache hit %s\n", h.c_str());
    update_manifest(s, "distill", kv, h, basenames(outputs));
    return 0;
  }

  const SplitSets sets = load_splits(s);
  std::string csv = "model_id,accuracy,fpr,recall,seed\n";
  for (std::size_t k = 0; k < kFamilies.size(); ++k) {
    const ArchitectureId arch{kFamilies[k], Side::Defender, s.width_scale};
    const std::string id = model_id(arch) + "-distilled";
    TrainConfig tc;
    tc.learning_rate = s.learning_rate;
    tc.epochs = epochs_for(s, arch.family);
    tc.batch_size = s.batch;
    tc.seed = derive_seed(s.seed, 40 + k);

    const auto t0 = std::chrono::steady_clock::now();
    const NeuralModel student = distill(arch, sets.def_train, tc, s.temperature);
    const ClassifierMetrics m = evaluate_classifier(student, sets.def_test);
    const fs::path mp = outputs[1 + k];
    save_model(student, mp.string());
    write_model_sidecar(mp, id, student, kv, tc.seed);
    csv += id + "," + fmt17(m.accuracy) + "," + fmt17(m.false_positive_rate) + "," +
           fmt17(m.recall) + "," + std::to_string(s.seed) + "\n";
    std::printf("distill: %s acc=%.4f fpr=%.4f recall=%.4f (T=%g)\n", id.c_str(),
                m.accuracy, m.false_positive_rate, m.recall, s.temperature);
    std::fprintf(stderr, "distill: %s in %.1fs\n", id.c_str(), elapsed_s(t0));
  }
  write_text(metrics_csv, csv);
  update_manifest(s, "distill", kv, h, basenames(outputs));
  return 0;
}

AttackKind parse_attack_kind(const std::string& name) {
  for (AttackKind k : {AttackKind::InitOnly, AttackKind::Fgsm, AttackKind::Fgv,
                       AttackKind::Deepfool, AttackKind::SsfIter, AttackKind::Va1,
                       AttackKind::Va2})
    if (attack_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown attack kind '" + name + "'");
}

int stage_attack(const Settings& s) {
  fs::create_directories(s.workdir);
  std::string sur_id = s.surrogate;
  fs::path sur_path;
  if (fs::exists(sur_id) && fs::is_regular_file(sur_id)) {
    sur_path = sur_id;
  } else {
    if (sur_id.find("-w") == std::string::npos) sur_id += "-w" + fmtg(s.width_scale);
    sur_path = wpath(s, "model-" + sur_id + "-" + kv_hash(train_kv(s)) + ".etdm");
  }
  const NeuralModel surrogate = load_model_checked(sur_path, "train");

  AttackConfig cfg;
  cfg.kind = parse_attack_kind(s.attack_kind);
  cfg.epsilon = s.epsilon;
  cfg.step = s.step;
  cfg.size = s.size;
  cfg.sigma = s.sigma;
  cfg.max_iter = s.max_iter;
  cfg.alpha = s.alpha;
  cfg.u = s.u;
  cfg.seed = derive_seed(s.seed, 50);

  KeyValues kv;
  kv.emplace_back("stage", "attack");
  kv.emplace_back("surrogate", sur_id);
  kv.emplace_back("surrogate-hash", hex64(model_hash(surrogate)));
  kv.emplace_back("kind", s.attack_kind);
  kv.emplace_back("epsilon", fmt17(cfg.epsilon));
  kv.emplace_back("step", std::to_string(cfg.step));
  kv.emplace_back("size", fmt17(cfg.size));
  kv.emplace_back("sigma", fmt17(cfg.sigma));
  kv.emplace_back("max-iter", std::to_string(cfg.max_iter));
  kv.emplace_back("alpha", fmt17(cfg.alpha));
  kv.emplace_back("u", fmt17(cfg.u));
  kv.emplace_back("count", std::to_string(s.attack_count));
  kv.emplace_back("seed", std::to_string(s.seed));
  const std::string h = kv_hash(kv);
  const fs::path out_csv = wpath(s, "batch-" + s.attack_kind + "-" + h + ".csv");
  if (!s.force && fs::exists(out_csv)) {
    std::printf("attack: cache hit %s\n", h.c_str());
    update_manifest(s, "attack", kv, h, basenames({out_csv}));
    return 0;
  }

  Tensor pool({1, kIntervalsPerDay}, std::vector<double>(kIntervalsPerDay, 0.0));
  const Tensor* pool_ptr = nullptr;
  if (cfg.kind == AttackKind::Va1) {
    pool = normal_rows(load_splits(s).def_test);
    pool_ptr = &pool;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const AdversarialBatch batch = generate_batch(surrogate, sur_id, cfg, s.attack_count, pool_ptr);
  save_batch(batch, out_csv.string());
  double evals = 0.0;
  for (std::size_t it : batch.iterations) evals += double(it);
  std::printf("attack: %zu %s vectors vs %s, avg L1 %.4f kWh, %.1f gradient evals/vector -> %s\n",
              s.attack_count, s.attack_kind.c_str(), sur_id.c_str(), average_l1(batch),
              s.attack_count ? evals / double(s.attack_count) : 0.0,
              out_csv.string().c_str());
  std::fprintf(stderr, "attack: %.1fs\n", elapsed_s(t0));
  update_manifest(s, "attack", kv, h, basenames({out_csv}));
  return 0;
}

std::vector<AttackConfig> white_grid(const Settings& s) {
  std::vector<AttackConfig> grid;
  for (double eps : parse_log_grid_spec(s.eps_grid, "--eps-grid")) {
    AttackConfig c;
    c.kind = AttackKind::Fgsm;
    c.epsilon = eps;
    c.sigma = s.sigma;
    grid.push_back(c);
  }
  for (double eps : parse_log_grid_spec(s.eps_grid, "--eps-grid")) {
    AttackConfig c;
    c.kind = AttackKind::Fgv;
    c.epsilon = eps;
    c.sigma = s.sigma;
    grid.push_back(c);
  }
  for (std::size_t step : ssf_steps(s))
    for (double size : parse_log_grid_spec(s.size_grid, "--size-grid")) {
      AttackConfig c;
      c.kind = AttackKind::SsfIter;
      c.step = step;
      c.size = size;
      c.sigma = s.sigma;
      grid.push_back(c);
    }
  return grid;
}

// DeepFool runs as its own single-cell experiment rather than inside the
// main grids: on a saturated model its boundary gradient can vanish, which
// aborts the whole experiment, and that must not take the rest of the sweep
// down with it.
std::vector<AttackConfig> deepfool_grid(const Settings& s) {
  AttackConfig c;
  c.kind = AttackKind::Deepfool;
  c.max_iter = s.max_iter;
  c.sigma = s.sigma;
  return {c};
}

std::vector<AttackConfig> black_grid(const Settings& s) {
  std::vector<AttackConfig> grid;
  for (double alpha : parse_linear_grid_spec(s.alpha_grid, "--alpha-grid")) {
    AttackConfig c;
    c.kind = AttackKind::Va1;
    c.alpha = alpha;
    grid.push_back(c);
  }
  for (double u : parse_log_grid_spec(s.u_grid, "--u-grid")) {
    AttackConfig c;
    c.kind = AttackKind::Va2;
    c.u = u;
    grid.push_back(c);
  }
  const std::vector<AttackConfig> rest = white_grid(s);
  grid.insert(grid.end(), rest.begin(), rest.end());
  return grid;
}

std::vector<AttackReportRow> filter_rows(const std::vector<AttackReportRow>& rows,
                                         const std::string& defender,
                                         const std::string& attack) {
  std::vector<AttackReportRow> out;
  for (const AttackReportRow& r : rows)
    if (r.defender == defender && r.attack == attack && r.setting == "black")
      out.push_back(r);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string attack_param_text(const AttackReportRow& r) {
  if (r.attack == "fgsm" || r.attack == "fgv") return "eps=" + fmtg(r.epsilon);
  if (r.attack == "ssf-iter")
    return "step=" + std::to_string(r.step) + " size=" + fmtg(r.size);
  if (r.attack == "va1") return "alpha=" + fmtg(r.alpha);
  if (r.attack == "va2") return "u=" + fmtg(r.u);
  if (r.attack == "deepfool") return "max_iter=" + std::to_string(r.max_iter);
  return "sigma=" + fmtg(r.sigma);
}

// The shareable report set: stable-named report + per-figure CSVs under the
// out directory, rebuilt byte-identically from the same rows.
void write_report_set(const Settings& s, const std::vector<AttackReportRow>& rows,
                      const json& meta) {
  const fs::path odir = out_dir(s);
  fs::create_directories(odir);
  emit_report(rows, ReportFormat::Csv, (odir / "report.csv").string());
  emit_report(rows, ReportFormat::Json, (odir / "report.json").string());

  std::vector<AttackReportRow> plain;
  std::vector<AttackReportRow> distilled;
  for (const AttackReportRow& r : rows)
    (ends_with(r.defender, "-distilled") ? distilled : plain).push_back(r);
  write_plot_data(plain, odir.string());

  if (!distilled.empty()) {
    std::vector<std::string> defenders;
    for (const AttackReportRow& r : plain)
      if (std::find(defenders.begin(), defenders.end(), r.defender) == defenders.end())
        defenders.push_back(r.defender);
    for (const std::string& did : defenders) {
      const std::string family = did.substr(0, did.find('-'));
      for (const char* kind : {"fgsm", "fgv", "ssf-iter"}) {
        const auto p = filter_rows(plain, did, kind);
        const auto d = filter_rows(distilled, did + "-distilled", kind);
        if (p.empty() || p.size() != d.size()) continue;
        const DefenseComparison cmp = compare_defenses(p, d);
        std::string fname = std::string("defense_") + kind + "_" + family + ".csv";
        std::replace(fname.begin(), fname.end(), '-', '_');
        write_defense_plot_data(cmp, (odir / fname).string());
        std::printf("defense: %s %s distilled bypass <= plain in %zu/%zu cells (%zu strictly lower)\n",
                    did.c_str(), kind, cmp.reduced_or_equal, cmp.cells,
                    cmp.strictly_reduced);
      }
    }
  }
  write_json_file(odir / "meta.json", meta);
}

void print_report_summary(const std::vector<AttackReportRow>& rows) {
  std::vector<std::pair<std::string, std::size_t>> best;  // key -> row index
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].attack == "init-only") continue;
    const std::string key = rows[i].setting + " " + rows[i].defender;
    auto it = std::find_if(best.begin(), best.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it == best.end())
      best.emplace_back(key, i);
    else if (rows[i].bypass > rows[it->second].bypass)
      it->second = i;
  }
  for (const auto& [key, i] : best) {
    const AttackReportRow& r = rows[i];
    std::printf("summary: %-32s worst cell %s %s bypass=%.3f avg_l1=%.3f kWh (%.3f of normal)\n",
                key.c_str(), r.attack.c_str(), attack_param_text(r).c_str(), r.bypass,
                r.avg_l1, r.avg_l1_frac);
  }
}

int stage_evaluate(const Settings& s) {
  fs::create_directories(s.workdir);
  const std::string ht = kv_hash(train_kv(s));
  const std::string hd = kv_hash(distill_kv(s));

  std::size_t distilled_found = 0;
  std::vector<fs::path> distilled_paths;
  for (Family f : kFamilies) {
    const ArchitectureId arch{f, Side::Defender, s.width_scale};
    const fs::path p = wpath(s, "model-" + model_id(arch) + "-distilled-" + hd + ".etdm");
    distilled_paths.push_back(p);
    if (fs::exists(p)) ++distilled_found;
  }
  if (distilled_found != 0 && distilled_found != kFamilies.size())
    throw MissingInput("partial distilled model set under " + s.workdir +
                       "; rerun distill");
  const bool with_distilled = distilled_found == kFamilies.size();

  const KeyValues kv = evaluate_kv(s, with_distilled ? hd : "none");
  const std::string h = kv_hash(kv);
  const fs::path rpt_csv = wpath(s, "report-" + h + ".csv");
  const fs::path rpt_json = wpath(s, "report-" + h + ".json");
  if (!s.force && all_exist({rpt_csv, rpt_json})) {
    std::printf("evaluate: cache hit %s\n", h.c_str());
    update_manifest(s, "evaluate", kv, h, basenames({rpt_csv, rpt_json}));
    return 0;
  }

  const SplitSets sets = load_splits(s);
  const Tensor pool = normal_rows(sets.def_test);
  const double nml1 = mean_l1(pool);
  std::printf("evaluate: %zu held-out normal profiles, mean L1 %.4f kWh\n", pool.shape[0],
              nml1);

  std::vector<NeuralModel> defenders;
  std::vector<NeuralModel> attackers;
  std::vector<NeuralModel> distilled;
  std::vector<std::string> def_ids;
  std::vector<std::string> att_ids;
  for (std::size_t k = 0; k < kFamilies.size(); ++k) {
    const ArchitectureId darch{kFamilies[k], Side::Defender, s.width_scale};
    const ArchitectureId aarch{kFamilies[k], Side::Attacker, s.width_scale};
    def_ids.push_back(model_id(darch));
    att_ids.push_back(model_id(aarch));
    defenders.push_back(
        load_model_checked(wpath(s, "model-" + def_ids[k] + "-" + ht + ".etdm"), "train"));
    attackers.push_back(
        load_model_checked(wpath(s, "model-" + att_ids[k] + "-" + ht + ".etdm"), "train"));
    if (with_distilled) distilled.push_back(load_model_checked(distilled_paths[k], "distill"));
  }

  const std::vector<AttackConfig> wg = white_grid(s);
  const std::vector<AttackConfig> bg = black_grid(s);
  const std::vector<AttackConfig> dfg = deepfool_grid(s);
  std::vector<AttackReportRow> all_rows;
  std::vector<AttackReportRow> distilled_rows;
  std::vector<std::string> sweep_errors;

  // A vanishing boundary gradient aborts a DeepFool batch by contract; the
  // cell's rows are dropped and the failure is kept in the report metadata.
  auto run_deepfool = [&](const ExperimentSpec& spec, const ExperimentContext& ctx,
                          std::vector<AttackReportRow>* sink) {
    try {
      std::vector<AttackReportRow> rows = run_experiment(spec, ctx);
      for (AttackReportRow& r : rows)
        if (r.attack != "init-only") sink->push_back(std::move(r));
    } catch (const std::exception& e) {
      const std::string note =
          (spec.surrogate_id == spec.defender_id ? "white deepfool vs " : "black deepfool vs ") +
          spec.defender_id + ": " + e.what();
      sweep_errors.push_back(note);
      std::fprintf(stderr, "evaluate: WARNING %s; rows omitted\n", note.c_str());
    }
  };

  for (std::size_t f = 0; f < kFamilies.size(); ++f) {
    ExperimentSpec spec;
    spec.vectors_per_cell = s.vectors;
    spec.normal_mean_l1 = nml1;
    spec.init_sigma = s.sigma;

    spec.defender_id = def_ids[f];
    spec.surrogate_id = def_ids[f];
    spec.grid = wg;
    spec.seed = derive_seed(s.seed, 60 + f);
    ExperimentContext ctx;
    ctx.defender = &defenders[f];
    ctx.surrogate = &defenders[f];
    ctx.normal_pool = &pool;
    auto t0 = std::chrono::steady_clock::now();
    std::vector<AttackReportRow> rows = run_experiment(spec, ctx);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    spec.grid = dfg;
    spec.seed = derive_seed(s.seed, 70 + f);
    run_deepfool(spec, ctx, &all_rows);
    std::fprintf(stderr, "evaluate: white %s %zu cells in %.1fs\n", def_ids[f].c_str(),
                 wg.size() + dfg.size(), elapsed_s(t0));

    spec.surrogate_id = att_ids[f];
    spec.grid = bg;
    spec.seed = derive_seed(s.seed, 63 + f);
    ctx.surrogate = &attackers[f];
    t0 = std::chrono::steady_clock::now();
    rows = run_experiment(spec, ctx);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    spec.grid = dfg;
    spec.seed = derive_seed(s.seed, 73 + f);
    run_deepfool(spec, ctx, &all_rows);
    std::fprintf(stderr, "evaluate: black %s %zu cells in %.1fs\n", def_ids[f].c_str(),
                 bg.size() + dfg.size(), elapsed_s(t0));

    if (with_distilled) {
      // Same grids, surrogate, and seeds as the plain black-box runs, so both
      // defenders face bit-identical adversarial batches.
      spec.defender_id = def_ids[f] + "-distilled";
      ctx.defender = &distilled[f];
      spec.grid = bg;
      spec.seed = derive_seed(s.seed, 63 + f);
      t0 = std::chrono::steady_clock::now();
      rows = run_experiment(spec, ctx);
      distilled_rows.insert(distilled_rows.end(), rows.begin(), rows.end());
      spec.grid = dfg;
      spec.seed = derive_seed(s.seed, 73 + f);
      run_deepfool(spec, ctx, &distilled_rows);
      std::fprintf(stderr, "evaluate: black %s %zu cells in %.1fs\n",
                   spec.defender_id.c_str(), bg.size() + dfg.size(), elapsed_s(t0));
    }
  }
  all_rows.insert(all_rows.end(), distilled_rows.begin(), distilled_rows.end());

  emit_report(all_rows, ReportFormat::Csv, rpt_csv.string());
  emit_report(all_rows, ReportFormat::Json, rpt_json.string());
  json meta;
  meta["config"] = kv_json(kv);
  meta["hash"] = h;
  meta["normal-mean-l1"] = fmt17(nml1);
  meta["errors"] = sweep_errors;
  write_json_file(fs::path(rpt_csv.string() + ".meta.json"), meta);

  write_report_set(s, all_rows, meta);
  print_report_summary(all_rows);
  std::printf("evaluate: %zu report rows -> %s\n", all_rows.size(),
              (fs::path(out_dir(s)) / "report.csv").string().c_str());
  update_manifest(s, "evaluate", kv, h, basenames({rpt_csv, rpt_json}));
  return 0;
}

int stage_report(const Settings& s) {
  // Prefer the report that includes distilled rows when both exist.
  const std::string hd = kv_hash(distill_kv(s));
  fs::path rpt_csv;
  KeyValues kv;
  for (const std::string& dh : {hd, std::string("none")}) {
    const KeyValues cand = evaluate_kv(s, dh);
    const fs::path p = wpath(s, "report-" + kv_hash(cand) + ".csv");
    if (fs::exists(p)) {
      rpt_csv = p;
      kv = cand;
      break;
    }
  }
  if (rpt_csv.empty())
    throw MissingInput("no report under " + s.workdir +
                       " matches these flags; run evaluate first");
  const std::vector<AttackReportRow> rows = parse_report_csv(rpt_csv.string());
  const json meta = read_json_file(fs::path(rpt_csv.string() + ".meta.json"));
  write_report_set(s, rows, meta);
  print_report_summary(rows);
  std::printf("report: %zu rows -> %s\n", rows.size(), out_dir(s).c_str());
  update_manifest(s, "report", kv, kv_hash(kv), {"report.csv", "report.json"});
  return 0;
}

int stage_reproduce(const Settings& s) {
  if (int rc = stage_prepare(s)) return rc;
  if (int rc = stage_train(s)) return rc;
  if (int rc = stage_distill(s)) return rc;
  if (int rc = stage_evaluate(s)) return rc;
  return stage_report(s);
}

void validate_settings(const Settings& s) {
  if (s.rows < 2) throw std::invalid_argument("--rows must be at least 2");
  if (s.count < 4) throw std::invalid_argument("--count must be at least 4");
  if (!(s.polluted_fraction >= 0.0 && s.polluted_fraction <= 1.0))
    throw std::invalid_argument("--polluted-fraction must lie in [0,1]");
  if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
    throw std::invalid_argument("--test-fraction must lie in (0,1)");
  if (!(s.width_scale > 0.0)) throw std::invalid_argument("--width-scale must be positive");
  if (!(s.learning_rate > 0.0)) throw std::invalid_argument("--lr must be positive");
  if (s.batch == 0) throw std::invalid_argument("--batch must be positive");
  if (s.epochs == 0) throw std::invalid_argument("--epochs must be positive");
  if (!(s.temperature >= 1.0)) throw std::invalid_argument("--temperature must be >= 1");
  if (!(s.sigma >= 0.0)) throw std::invalid_argument("--sigma must be nonnegative");
  if (s.vectors == 0) throw std::invalid_argument("--vectors must be positive");
  if (s.max_iter == 0) throw std::invalid_argument("--max-iter must be positive");
  if (s.attack_count == 0) throw std::invalid_argument("--attack-count must be positive");
  if (!(s.target_mean_l1 > 0.0))
    throw std::invalid_argument("--target-mean-l1 must be positive");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Settings s;
  CLI::App app{
      "theftbench: trains smart-meter theft detectors, crafts low-consumption "
      "adversarial measurement vectors against them, and reports detection "
      "performance with and without defensive distillation."};
  app.set_config("--config", "", "flat key=value config file; command-line flags override it");
  app.add_option("--seed", s.seed, "master seed; every artifact derives from it")
      ->capture_default_str();
  app.add_option("--jobs", s.jobs, "OpenMP thread count (0 = runtime default)")
      ->capture_default_str();
  app.add_flag("--force", s.force, "recompute stages even when cached outputs exist");
  app.add_option("--workdir", s.workdir, "stage output directory")->capture_default_str();
  app.add_option("--out", s.out, "report set directory (default <workdir>/reports)");
  app.add_option("--data-in", s.data_in,
                 "raw half-hourly readings file (plain or gzip), used with --raw");
  bool synthetic_flag = false;
  CLI::Option* raw_opt =
      app.add_flag("--raw", s.raw, "build datasets from the --data-in readings");
  CLI::Option* syn_opt = app.add_flag("--synthetic", synthetic_flag,
                                      "build datasets from the synthetic generator (default)");
  raw_opt->excludes(syn_opt);
  app.add_option("--count", s.count, "synthetic profile pool size")->capture_default_str();
  app.add_option("--rows", s.rows, "labeled rows per dataset")->capture_default_str();
  app.add_option("--polluted-fraction", s.polluted_fraction,
                 "fraction of rows rewritten by theft scenarios")
      ->capture_default_str();
  app.add_option("--target-mean-l1", s.target_mean_l1,
                 "population mean daily consumption for the synthesizer, kWh")
      ->capture_default_str();
  app.add_option("--test-fraction", s.test_fraction, "held-out fraction per dataset")
      ->capture_default_str();
  app.add_option("--width-scale", s.width_scale, "layer width multiplier")
      ->capture_default_str();
  app.add_option("--epochs", s.epochs, "training epochs (all families)")
      ->capture_default_str();
  app.add_option("--epochs-fnn", s.epochs_fnn, "override epochs for the dense nets");
  app.add_option("--epochs-cnn", s.epochs_cnn, "override epochs for the conv nets");
  app.add_option("--epochs-rnn", s.epochs_rnn, "override epochs for the recurrent nets");
  app.add_option("--lr", s.learning_rate, "RMSProp learning rate")->capture_default_str();
  app.add_option("--batch", s.batch, "mini-batch size")->capture_default_str();
  app.add_option("--temperature", s.temperature, "distillation temperature")
      ->capture_default_str();
  app.add_option("--vectors", s.vectors, "adversarial vectors per grid cell")
      ->capture_default_str();
  app.add_option("--sigma", s.sigma, "Gaussian initialization scale for attacks")
      ->capture_default_str();
  app.add_option("--max-iter", s.max_iter, "deepfool iteration cap")->capture_default_str();
  app.add_option("--eps-grid", s.eps_grid, "fgsm/fgv epsilon grid, log lo_exp:hi_exp:points")
      ->capture_default_str();
  app.add_option("--size-grid", s.size_grid, "ssf-iter size grid, log lo_exp:hi_exp:points")
      ->capture_default_str();
  app.add_option("--step-grid", s.step_grid, "ssf-iter step counts, comma list")
      ->capture_default_str();
  app.add_option("--step-max", s.step_max,
                 "use every step count 1..N instead of --step-grid (full heatmap)")
      ->capture_default_str();
  app.add_option("--alpha-grid", s.alpha_grid, "va1 alpha grid, linear lo:hi:points")
      ->capture_default_str();
  app.add_option("--u-grid", s.u_grid, "va2 upper-bound grid, log lo_exp:hi_exp:points")
      ->capture_default_str();
  app.add_option("--attack-kind", s.attack_kind, "attack for the `attack` subcommand")
      ->check(CLI::IsMember({"init-only", "fgsm", "fgv", "deepfool", "ssf-iter", "va1", "va2"}))
      ->capture_default_str();
  app.add_option("--surrogate", s.surrogate,
                 "surrogate for the `attack` subcommand: model id (e.g. fnn-attacker) or file")
      ->capture_default_str();
  app.add_option("--attack-count", s.attack_count, "vectors for the `attack` subcommand")
      ->capture_default_str();
  app.add_option("--epsilon", s.epsilon, "fgsm/fgv step size")->capture_default_str();
  app.add_option("--step", s.step, "ssf-iter iteration count")->capture_default_str();
  app.add_option("--size", s.size, "ssf-iter per-step budget")->capture_default_str();
  app.add_option("--alpha", s.alpha, "va1 scaling factor")->capture_default_str();
  app.add_option("--u", s.u, "va2 uniform upper bound")->capture_default_str();

  const std::vector<std::pair<const char*, const char*>> stages{
      {"prepare-data", "synthesize or ingest profiles and build the labeled datasets"},
      {"train", "train defender and attacker classifiers, write metrics"},
      {"distill", "train distilled defenders at the configured temperature"},
      {"attack", "generate one adversarial batch against a surrogate"},
      {"evaluate", "run the attack grids against the defenders and write reports"},
      {"report", "rebuild the report set and print a summary"},
      {"reproduce", "chain prepare-data, train, distill, evaluate, report"},
  };
  for (const auto& [name, desc] : stages) app.add_subcommand(name, desc)->fallthrough();
  app.require_subcommand(0, 1);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
    return 2;
  }

  const std::vector<CLI::App*> chosen = app.get_subcommands();
  if (chosen.empty()) {
    std::fprintf(stderr, "%s", app.help().c_str());
    return 2;
  }
  if (s.jobs > 0) {
#ifdef _OPENMP
    omp_set_num_threads(s.jobs);
#endif
  }

  const std::string cmd = chosen.front()->get_name();
  try {
    validate_settings(s);
    if (cmd == "prepare-data") return stage_prepare(s);
    if (cmd == "train") return stage_train(s);
    if (cmd == "distill") return stage_distill(s);
    if (cmd == "attack") return stage_attack(s);
    if (cmd == "evaluate") return stage_evaluate(s);
    if (cmd == "report") return stage_report(s);
    if (cmd == "reproduce") return stage_reproduce(s);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "%s", app.help().c_str());
  return 2;
}

}  // namespace etd
