#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "etd/eval.hpp"
#include "json.hpp"

namespace etd {
namespace {

const char* kReportHeader =
    "setting,defender,attack,epsilon,alpha,u,sigma,step,size,max_iter,"
    "recall,bypass,avg_l1,avg_l1_frac,n,seed";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace

void emit_report(const std::vector<AttackReportRow>& rows, ReportFormat format,
                 const std::string& path) {
  std::ofstream out = open_out(path);
  if (format == ReportFormat::Csv) {
    out << kReportHeader << '\n';
    for (const AttackReportRow& r : rows) {
      out << r.setting << ',' << r.defender << ',' << r.attack << ','
          << fmt(r.epsilon) << ',' << fmt(r.alpha) << ',' << fmt(r.u) << ','
          << fmt(r.sigma) << ',' << r.step << ',' << fmt(r.size) << ','
          << r.max_iter << ',' << fmt(r.recall) << ',' << fmt(r.bypass) << ','
          << fmt(r.avg_l1) << ',' << fmt(r.avg_l1_frac) << ',' << r.n << ','
          << r.seed << '\n';
    }
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const AttackReportRow& r : rows) {
      nlohmann::json j;
      j["setting"] = r.setting;
      j["defender"] = r.defender;
      j["attack"] = r.attack;
      j["epsilon"] = r.epsilon;
      j["alpha"] = r.alpha;
      j["u"] = r.u;
      j["sigma"] = r.sigma;
      j["step"] = r.step;
      j["size"] = r.size;
      j["max_iter"] = r.max_iter;
      j["recall"] = r.recall;
      j["bypass"] = r.bypass;
      j["avg_l1"] = r.avg_l1;
      j["avg_l1_frac"] = r.avg_l1_frac;
      j["n"] = r.n;
      j["seed"] = r.seed;
      arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<AttackReportRow> parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader)
    throw std::runtime_error(path + ": not a report file (bad header)");
  std::vector<AttackReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 16)
      throw std::runtime_error(path + ": bad field count on row " +
                               std::to_string(rows.size() + 1));
    AttackReportRow r;
    r.setting = f[0];
    r.defender = f[1];
    r.attack = f[2];
    r.epsilon = std::strtod(f[3].c_str(), nullptr);
    r.alpha = std::strtod(f[4].c_str(), nullptr);
    r.u = std::strtod(f[5].c_str(), nullptr);
    r.sigma = std::strtod(f[6].c_str(), nullptr);
    r.step = std::size_t(std::strtoull(f[7].c_str(), nullptr, 10));
    r.size = std::strtod(f[8].c_str(), nullptr);
    r.max_iter = std::size_t(std::strtoull(f[9].c_str(), nullptr, 10));
    r.recall = std::strtod(f[10].c_str(), nullptr);
    r.bypass = std::strtod(f[11].c_str(), nullptr);
    r.avg_l1 = std::strtod(f[12].c_str(), nullptr);
    r.avg_l1_frac = std::strtod(f[13].c_str(), nullptr);
    r.n = std::size_t(std::strtoull(f[14].c_str(), nullptr, 10));
    r.seed = std::strtoull(f[15].c_str(), nullptr, 10);
    rows.push_back(r);
  }
  return rows;
}

void write_plot_data(const std::vector<AttackReportRow>& rows,
                     const std::string& dir) {
  auto path = [&dir](const char* name) { return dir + "/" + name; };

  {
    std::ofstream out = open_out(path("fig2_va1.csv"));
    out << "setting,defender,alpha,recall,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "va1")
        out << r.setting << ',' << r.defender << ',' << fmt(r.alpha) << ','
            << fmt(r.recall) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("fig2b_va2.csv"));
    out << "setting,defender,u,recall,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "va2")
        out << r.setting << ',' << r.defender << ',' << fmt(r.u) << ','
            << fmt(r.recall) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("fig3_fgsm.csv"));
    out << "setting,defender,epsilon,bypass,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "fgsm")
        out << r.setting << ',' << r.defender << ',' << fmt(r.epsilon) << ','
            << fmt(r.bypass) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("fig4_fgv.csv"));
    out << "setting,defender,epsilon,bypass,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "fgv")
        out << r.setting << ',' << r.defender << ',' << fmt(r.epsilon) << ','
            << fmt(r.bypass) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("fig5_ssf_white.csv"));
    out << "defender,step,size,recall,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "ssf-iter" && r.setting == "white")
        out << r.defender << ',' << r.step << ',' << fmt(r.size) << ','
            << fmt(r.recall) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("fig6_ssf_black.csv"));
    out << "defender,step,size,recall,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "ssf-iter" && r.setting == "black")
        out << r.defender << ',' << r.step << ',' << fmt(r.size) << ','
            << fmt(r.recall) << ',' << fmt(r.avg_l1) << '\n';
  }
  {
    std::ofstream out = open_out(path("table4_deepfool.csv"));
    out << "setting,defender,recall,avg_l1\n";
    for (const auto& r : rows)
      if (r.attack == "deepfool")
        out << r.setting << ',' << r.defender << ',' << fmt(r.recall) << ','
            << fmt(r.avg_l1) << '\n';
  }
}

void write_defense_plot_data(const DefenseComparison& cmp, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "setting,defender,attack,epsilon,step,size,bypass_plain,"
         "bypass_distilled,l1_plain,l1_distilled\n";
  for (const auto& row : cmp.rows) {
    const AttackReportRow& a = row.plain;
    out << a.setting << ',' << a.defender << ',' << a.attack << ','
        << fmt(a.epsilon) << ',' << a.step << ',' << fmt(a.size) << ','
        << fmt(a.bypass) << ',' << fmt(row.distilled.bypass) << ','
        << fmt(a.avg_l1) << ',' << fmt(row.distilled.avg_l1) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace etd
