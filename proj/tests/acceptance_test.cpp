// Copyright 2026 The metareg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL/BLOCKED line per criterion.
//
//   acceptance_test [--criteria 1,2,...]
//
// Exit status: 0 when every requested criterion passed, 1 on any failure, 77
// when nothing failed but at least one criterion could not run (criteria 1-4
// need the prepared public dataset; see README).

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metareg/estimation.hpp"
#include "metareg/report.hpp"
#include "metareg/scenario_config.hpp"
#include "metareg/simulation.hpp"
#include "metareg/special_functions.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace metareg;

enum class Outcome { kPass, kFail, kBlocked };

struct Verdict {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

// Collects individual checks; the first failures are reported in the detail.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }
  Verdict verdict() const {
    if (failures_.empty()) return {Outcome::kPass, notes_};
    std::string detail = "failed: ";
    for (std::size_t i = 0; i < failures_.size(); ++i) detail += (i ? "; " : "") + failures_[i];
    return {Outcome::kFail, detail};
  }

 private:
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const CoefficientSummary* find_coef(const SpecSummary& spec, const std::string& label) {
  for (const auto& c : spec.coefficients) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

const SpecSummary* find_spec(const SimulationSummary& s, const std::string& model) {
  for (const auto& spec : s.specs) {
    if (spec.model == model) return &spec;
  }
  return nullptr;
}

constexpr const char* kOne = "year";
constexpr const char* kTwo = "year + age";
constexpr const char* kInter = "year + age + year:age";

// Looks up a coefficient metric, failing the check when the term is missing.
double metric(Checker& c, const SimulationSummary& s, const std::string& model, const std::string& label,
              double CoefficientSummary::*member) {
  const SpecSummary* spec = find_spec(s, model);
  const CoefficientSummary* coef = spec ? find_coef(*spec, label) : nullptr;
  if (coef == nullptr) {
    c.check(false, "missing " + label + " under '" + model + "'");
    return NAN;
  }
  return coef->*member;
}

std::optional<fs::path> dataset_path() {
  if (const char* env = std::getenv("METAREG_DATASET"); env != nullptr && *env != '\0') return fs::path(env);
  const fs::path bundled = fs::path(METAREG_DATA_DIR) / "one_year_mortality.csv";
  if (fs::exists(bundled)) return bundled;
  return std::nullopt;
}

Verdict blocked() {
  return {Outcome::kBlocked,
          "prepared public dataset not found (set METAREG_DATASET or add data/one_year_mortality.csv)"};
}

// Simulation summaries are shared between criteria 2-4 and within 5.
std::map<std::string, SimulationSummary> g_summaries;

const SimulationSummary& scenario_summary(const std::string& cfg_name, const std::optional<fs::path>& design,
                                          double* elapsed = nullptr) {
  auto it = g_summaries.find(cfg_name);
  if (it != g_summaries.end()) return it->second;
  ScenarioConfig config = load_scenario_config(fs::path(METAREG_DATA_DIR) / "scenarios" / cfg_name);
  if (design) config.design = fs::absolute(*design).string();
  const Scenario scenario = make_scenario(config);
  const auto start = std::chrono::steady_clock::now();
  auto summary = run_simulation(scenario, 1);
  if (elapsed) *elapsed = seconds_since(start);
  return g_summaries.emplace(cfg_name, std::move(summary)).first->second;
}

std::string run_capture(const std::string& cmd, int* status) {
  std::string out;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (pipe == nullptr) {
    *status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  *status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Verdict criterion1() {
  const auto data = dataset_path();
  if (!data) return blocked();
#ifndef METAREG_CLI
  return {Outcome::kBlocked, "command-line tool not built"};
#else
  Checker c;
  const fs::path out = fs::temp_directory_path() / "metareg_acceptance_fit.json";
  const std::string cmd = std::string(METAREG_CLI) + " fit --data '" + data->string() +
                          "' --id study_id --moderators year,age --interaction --out '" + out.string() + "'";
  const auto start = std::chrono::steady_clock::now();
  int status = 0;
  const std::string log = run_capture(cmd, &status);
  const double elapsed = seconds_since(start);
  if (status != 0) return {Outcome::kFail, "fit exited with " + std::to_string(status) + ": " + log};
  const FitReport report = fit_report_from_json(slurp(out));
  fs::remove(out);
  c.check(report.k == 181, "k = " + std::to_string(report.k) + " (expect 181)");
  const double beta[] = {-1.1477, -0.0066, 0.0333, -0.0018};
  const double lower[] = {-1.2271, -0.0185, 0.0208, -0.0035};
  const double upper[] = {-1.0684, 0.0052, 0.0457, -0.0001};
  if (report.coefficients.size() != 4) return {Outcome::kFail, "expected 4 coefficients"};
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& r = report.coefficients[j];
    c.check(std::abs(r.estimate - beta[j]) <= 0.0005, r.label + " = " + fmt(r.estimate));
    c.check(std::abs(r.lower - lower[j]) <= 0.001 && std::abs(r.upper - upper[j]) <= 0.001,
            r.label + " CI [" + fmt(r.lower) + ", " + fmt(r.upper) + "]");
  }
  c.check(elapsed < 1.0, "runtime " + fmt(elapsed, 3) + " s");
  return c.verdict();
#endif
}

Verdict criterion2() {
  const auto data = dataset_path();
  if (!data) return blocked();
  Checker c;
  double elapsed = 0.0;
  const auto& s = scenario_summary("scenario_a.cfg", data, &elapsed);
  const auto cov = &CoefficientSummary::coverage;
  auto near = [&](const char* model, const char* label, double expected) {
    const double got = metric(c, s, model, label, cov);
    c.check(std::abs(got - expected) <= 0.015,
            std::string(model) + " " + label + " coverage " + fmt(got) + " vs " + fmt(expected));
  };
  near(kInter, "intercept", 0.9447);
  near(kInter, "year", 0.9495);
  near(kInter, "age", 0.9527);
  near(kInter, "year:age", 0.9502);
  near(kTwo, "intercept", 0.8979);
  near(kTwo, "age", 0.9062);
  near(kOne, "year", 0.7718);
  c.check(elapsed <= 300.0, "runtime " + fmt(elapsed, 1) + " s single-threaded");
  return c.verdict();
}

Verdict criterion3() {
  const auto data = dataset_path();
  if (!data) return blocked();
  Checker c;
  const auto& s = scenario_summary("scenario_a.cfg", data);
  const auto bias = &CoefficientSummary::bias;
  for (const char* label : {"year", "age", "year:age"}) {
    const double b = metric(c, s, kInter, label, bias);
    c.check(std::abs(b) <= 0.001, std::string("interaction-model ") + label + " bias " + fmt(b));
  }
  const double one = metric(c, s, kOne, "year", bias);
  const double two = metric(c, s, kTwo, "year", bias);
  c.check(one < 0.0, "one-moderator year bias " + fmt(one) + " < 0");
  c.check(std::abs(one) >= 3.0 * std::abs(two), "|" + fmt(one) + "| >= 3 x |" + fmt(two) + "|");
  return c.verdict();
}

Verdict criterion4() {
  const auto data = dataset_path();
  if (!data) return blocked();
  Checker c;
  const auto& s = scenario_summary("scenario_b.cfg", data);
  double lo = 1.0, hi = 0.0;
  for (const auto& spec : s.specs) {
    c.check(!spec.empty(), spec.model + " has converged replicates");
    for (const auto& coef : spec.coefficients) {
      lo = std::min(lo, coef.coverage);
      hi = std::max(hi, coef.coverage);
      if (coef.coverage < 0.94 || coef.coverage > 0.96) {
        c.check(false, spec.model + " " + coef.label + " coverage " + fmt(coef.coverage));
      }
    }
  }
  c.note("coverage range [" + fmt(lo) + ", " + fmt(hi) + "]");
  const auto len = &CoefficientSummary::median_length;
  const double i0 = metric(c, s, kInter, "intercept", len);
  const double u0 = metric(c, s, kOne, "intercept", len);
  const double i1 = metric(c, s, kInter, "year", len);
  const double u1 = metric(c, s, kOne, "year", len);
  c.check(i0 > u0, "intercept length " + fmt(i0) + " > " + fmt(u0));
  c.check(i1 > u1, "year length " + fmt(i1) + " > " + fmt(u1));
  c.check(std::abs(i0 - 0.1663) <= 0.002 && std::abs(u0 - 0.1619) <= 0.002, "intercept lengths within 0.002");
  c.check(std::abs(i1 - 0.0249) <= 0.002 && std::abs(u1 - 0.0240) <= 0.002, "year lengths within 0.002");
  return c.verdict();
}

Verdict criterion5() {
  Checker c;
  const auto& a = scenario_summary("synthetic_a.cfg", std::nullopt);
  const auto& b = scenario_summary("synthetic_b.cfg", std::nullopt);
  const auto cov = &CoefficientSummary::coverage;
  auto true_model = [&](const SimulationSummary& s, const char* model, std::vector<std::string> labels) {
    for (const auto& label : labels) {
      const double got = metric(c, s, model, label, cov);
      c.check(got >= 0.94 && got <= 0.96, s.scenario + " true-model " + label + " coverage " + fmt(got));
    }
  };
  true_model(a, kInter, {"intercept", "year", "age", "year:age"});
  true_model(b, kOne, {"intercept", "year"});
  const double one = metric(c, a, kOne, "year", cov);
  c.check(one < 0.85, "A one-moderator year coverage " + fmt(one) + " < 0.85");
  const double b0 = metric(c, a, kTwo, "intercept", cov);
  const double b2 = metric(c, a, kTwo, "age", cov);
  c.check(b0 < 0.93, "A two-moderator intercept coverage " + fmt(b0) + " < 0.93");
  c.check(b2 < 0.93, "A two-moderator age coverage " + fmt(b2) + " < 0.93");
  return c.verdict();
}

Verdict criterion6() {
  // The grid runs over [0, 4]; reml_tau2 gets the same upper bound.
  constexpr double kUpper = 4.0;
  std::mt19937_64 gen(0xACCE7);
  std::uniform_int_distribution<int> k_dist(5, 20);
  std::uniform_int_distribution<int> p_dist(1, 4);
  std::uniform_real_distribution<double> tau_dist(0.0, 1.5);
  RemlSettings settings;
  settings.tau2_max = kUpper;
  double worst = 0.0;
  int boundary = 0;
  Checker c;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = k_dist(gen);
    const int p = p_dist(gen);
    const auto inst = metareg::testing::random_instance(gen, k, p, tau_dist(gen));
    const double grid = metareg::testing::grid_argmax(
        [&](double t) { return metareg::testing::brute_restricted_loglik(t, inst.design.values, inst.y, inst.v); },
        0.0, kUpper, 1e-4);
    const RemlResult fit = reml_tau2(inst.design, inst.effects, settings);
    if (fit.convergence.boundary) ++boundary;
    const double diff = std::abs(fit.tau2 - grid);
    worst = std::max(worst, diff);
    if (diff > 1e-4) {
      c.check(false, "instance " + std::to_string(trial) + " (k=" + std::to_string(k) + ", p=" + std::to_string(p) +
                         "): reml " + fmt(fit.tau2, 6) + " vs grid " + fmt(grid, 6));
    }
  }
  c.note("100 instances, max |diff| " + fmt_g(worst) + ", " + std::to_string(boundary) + " at the boundary");
  return c.verdict();
}

Verdict criterion7() {
  // 50-digit references.
  struct Ref {
    double df;
    double value;
  };
  const Ref refs[] = {{1, 12.706204736174704646},
                      {2, 4.3026527297494638523},
                      {5, 2.5705818356363155147},
                      {30, 2.04227245630123831},
                      {177, 1.9734572015938037092}};
  Checker c;
  double worst = 0.0;
  for (const auto& r : refs) {
    const double got = t_quantile(0.975, r.df);
    const double err = std::abs(got - r.value);
    worst = std::max(worst, err);
    if (err > 1e-8) c.check(false, "df " + fmt(r.df, 0) + ": " + fmt(got, 12) + " vs " + fmt(r.value, 12));
  }
  c.check(std::abs(t_quantile(0.975, 1) - 12.70620) < 5e-6, "t(0.975, 1) = " + fmt(t_quantile(0.975, 1), 5));
  c.check(std::abs(t_quantile(0.975, 2) - 4.30265) < 5e-6, "t(0.975, 2) = " + fmt(t_quantile(0.975, 2), 5));
  c.note("max error " + fmt_g(worst));
  return c.verdict();
}

Verdict criterion8() {
  Checker c;
  ScenarioConfig config = load_scenario_config(fs::path(METAREG_DATA_DIR) / "scenarios" / "synthetic_a.cfg");
  config.reps = 1000;
  const Scenario scenario = make_scenario(config);
  const auto one = run_simulation(scenario, 1);
  const auto four = run_simulation(scenario, 4);
  c.check(summary_to_csv(one) == summary_to_csv(four), "library CSV identical for 1 and 4 threads");
  c.check(summary_to_json(one) == summary_to_json(four), "library JSON identical for 1 and 4 threads");
#ifdef METAREG_CLI
  const fs::path root = fs::temp_directory_path() / "metareg_acceptance_determinism";
  fs::remove_all(root);
  std::string files[2][2];
  for (int t = 0; t < 2; ++t) {
    const fs::path dir = root / (t == 0 ? "t1" : "t4");
    fs::create_directories(dir);
    int status = 0;
    const std::string cmd = std::string(METAREG_CLI) + " simulate --quiet --reps 1000 --threads " +
                            (t == 0 ? "1" : "4") + " --scenario '" +
                            (fs::path(METAREG_DATA_DIR) / "scenarios" / "synthetic_a.cfg").string() +
                            "' --out-dir '" + dir.string() + "'";
    run_capture(cmd, &status);
    c.check(status == 0, std::string("CLI run with ") + (t == 0 ? "1" : "4") + " threads");
    files[t][0] = slurp(dir / "synthetic_a_summary.csv");
    files[t][1] = slurp(dir / "synthetic_a_summary.json");
  }
  c.check(!files[0][0].empty() && files[0][0] == files[1][0], "CLI CSV files byte-identical");
  c.check(!files[0][1].empty() && files[0][1] == files[1][1], "CLI JSON files byte-identical");
  fs::remove_all(root);
#endif
  return c.verdict();
}

Verdict criterion9() {
  DesignMatrix design;
  design.values = Eigen::MatrixXd::Ones(5, 1);
  design.column_labels = {kInterceptLabel};
  std::vector<EffectData> effects;
  for (int i = 0; i < 5; ++i) effects.push_back({static_cast<double>(i), 1.0});
  const double tau2 = reml_tau2(design, effects).tau2;
  Checker c;
  c.check(std::abs(tau2 - 1.5) <= 1e-8, "tau2 = " + fmt(tau2, 12));
  return c.verdict();
}

const std::map<int, std::pair<std::string, std::function<Verdict()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Verdict()>>> table = {
      {1, {"interaction-model fit on the public dataset", criterion1}},
      {2, {"scenario A coverage on the public dataset", criterion2}},
      {3, {"scenario A bias ordering", criterion3}},
      {4, {"scenario B calibration and interval lengths", criterion4}},
      {5, {"synthetic design qualitative bands", criterion5}},
      {6, {"REML matches grid search", criterion6}},
      {7, {"t quantile accuracy", criterion7}},
      {8, {"thread-count determinism", criterion8}},
      {9, {"closed-form REML", criterion9}},
  };
  return table;
}

std::vector<int> parse_selection(int argc, char** argv) {
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criteria" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) chosen.push_back(std::stoi(item));
    } else {
      throw std::invalid_argument("unknown argument '" + arg + "'");
    }
  }
  if (chosen.empty()) {
    for (const auto& [id, entry] : criteria()) chosen.push_back(id);
  }
  return chosen;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> chosen;
  try {
    chosen = parse_selection(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "usage: acceptance_test [--criteria 1,2,...]: " << e.what() << "\n";
    return 2;
  }
  bool failed = false;
  bool blocked_any = false;
  for (int id : chosen) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::cerr << "no criterion " << id << "\n";
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "BLOCKED";
    std::cout << tag << " criterion " << id << ": " << it->second.first << " (" << v.detail << ") ["
              << fmt(seconds_since(start), 2) << " s]" << std::endl;
    failed = failed || v.outcome == Outcome::kFail;
    blocked_any = blocked_any || v.outcome == Outcome::kBlocked;
  }
  if (failed) return 1;
  return blocked_any ? 77 : 0;
}
