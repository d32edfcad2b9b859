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

// metareg: mixed-effects meta-regression fits and misspecification
// simulations from the command line.
//
//   metareg fit --data studies.csv --events deaths --total n
//       --moderators year,age --interaction --out fit.json
//   metareg simulate --scenario data/scenarios/scenario_a.cfg --out-dir out/
//   metareg synth-design --out synthetic_design.csv

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "metareg/csv.hpp"
#include "metareg/errors.hpp"
#include "metareg/estimation.hpp"
#include "metareg/inference.hpp"
#include "metareg/report.hpp"
#include "metareg/scenario_config.hpp"
#include "metareg/simulation.hpp"

namespace {

using namespace metareg;

struct FitOptions {
  std::string data;
  std::string events = "events";
  std::string total = "total";
  std::string id;
  std::string moderators;
  bool interaction = false;
  double level = 0.95;
  std::string center = "mean";
  std::string out;
  std::string plot_data;
  int grid_points = 101;
};

struct SimulateOptions {
  std::string scenario;
  std::size_t reps = 0;
  bool reps_given = false;
  std::string seed;
  unsigned threads = 1;
  std::string out_dir = ".";
  bool quiet = false;
};

std::vector<std::string> split_names(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

int run_fit(const FitOptions& opt) {
  if (!(opt.level > 0.0 && opt.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  if (opt.center != "mean" && opt.center != "none") throw UsageError("--center must be 'mean' or 'none'");

  ModelSpec spec;
  spec.moderators = split_names(opt.moderators);
  spec.interaction = opt.interaction;
  spec.centering = opt.center == "mean" ? Centering::kMean : Centering::kNone;
  spec.validate();

  // Validate moderator names against the header first so the message lists
  // what is actually available.
  const auto header = read_csv_header(opt.data);
  for (const auto& m : spec.moderators) {
    if (!header.empty() && std::find(header.begin(), header.end(), m) == header.end()) {
      std::string available;
      for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
      throw UsageError("unknown moderator '" + m + "'; available columns: " + available);
    }
  }

  ColumnMapping mapping;
  mapping.events_col = opt.events;
  mapping.total_col = opt.total;
  mapping.moderator_cols = spec.moderators;
  if (!opt.id.empty()) mapping.id_col = opt.id;
  const Dataset dataset = ingest_csv(opt.data, mapping);

  const FitResult fit = fit_model(dataset, spec, dataset_effects(dataset));
  const FitReport report = make_fit_report(fit, spec, opt.level);
  print_fit_table(std::cout, report);
  if (!opt.out.empty()) write_file(opt.out, fit_report_to_json(report));

  if (!opt.plot_data.empty()) {
    if (opt.grid_points < 2) throw UsageError("--grid-points must be >= 2");
    const BuiltDesign built = build_design(dataset, spec);
    std::vector<PredictionBand> bands;
    for (std::size_t j = 0; j < spec.moderators.size(); ++j) {
      const auto col = built.design.values.col(static_cast<Eigen::Index>(j) + 1);
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      std::vector<double> grid(static_cast<std::size_t>(opt.grid_points));
      for (std::size_t g = 0; g < grid.size(); ++g) {
        grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid.size() - 1);
      }
      bands.push_back(predict_at(fit, spec.moderators[j], grid, {}, opt.level));
    }
    std::ofstream out(opt.plot_data);
    if (!out) throw DataError("cannot write '" + opt.plot_data + "'");
    write_band_csv(out, bands);
  }
  return 0;
}

int run_simulate(const SimulateOptions& opt) {
  ScenarioConfig config = load_scenario_config(opt.scenario);
  if (opt.reps_given) {
    if (opt.reps < 1) throw UsageError("--reps must be >= 1");
    config.reps = opt.reps;
  }
  if (!opt.seed.empty()) config.seed = parse_seed(opt.seed);
  if (opt.threads < 1) throw UsageError("--threads must be >= 1");
  const Scenario scenario = make_scenario(config);

  std::size_t last_pct = 0;
  ProgressCallback progress;
  if (!opt.quiet) {
    progress = [&](std::size_t done, std::size_t total) {
      const std::size_t pct = done * 100 / total;
      if (pct != last_pct || done == total) {
        last_pct = pct;
        std::cerr << "\r" << scenario.name << ": " << done << "/" << total << " replicates" << std::flush;
        if (done == total) std::cerr << "\n";
      }
    };
  }
  const SimulationSummary summary = run_simulation(scenario, opt.threads, progress);

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  write_file(dir / (scenario.name + "_summary.csv"), summary_to_csv(summary));
  write_file(dir / (scenario.name + "_summary.json"), summary_to_json(summary));
  for (const auto& spec : summary.specs) {
    if (spec.n_excluded > 0) {
      std::cerr << "model '" << spec.model << "': " << spec.n_excluded << " of " << spec.n_reps
                << " replicates excluded (fit failed)\n";
    }
  }
  std::cout << summary_to_csv(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-effects meta-regression with Knapp-Hartung inference"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Fit a meta-regression to a CSV of event counts");
  fit->add_option("--data", fit_opt.data, "Input CSV (header row, comma-delimited)")->required();
  fit->add_option("--events", fit_opt.events, "Event count column")->capture_default_str();
  fit->add_option("--total", fit_opt.total, "Sample size column")->capture_default_str();
  fit->add_option("--id", fit_opt.id, "Study label column");
  fit->add_option("--moderators", fit_opt.moderators, "Comma-separated moderator columns");
  fit->add_flag("--interaction", fit_opt.interaction, "Add the product of the two moderators");
  fit->add_option("--level", fit_opt.level, "Confidence level")->capture_default_str();
  fit->add_option("--center", fit_opt.center, "Moderator centering: mean or none")->capture_default_str();
  fit->add_option("--out", fit_opt.out, "JSON report path");
  fit->add_option("--plot-data", fit_opt.plot_data, "CSV of prediction bands at the other moderators' medians");
  fit->add_option("--grid-points", fit_opt.grid_points, "Grid nodes per moderator for --plot-data")
      ->capture_default_str();

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "Run a misspecification Monte Carlo experiment");
  sim->add_option("--scenario", sim_opt.scenario, "Scenario config file")->required();
  auto* reps = sim->add_option("--reps", sim_opt.reps, "Replicates (overrides the config)");
  sim->add_option("--seed", sim_opt.seed, "Master seed, decimal or 0x-hex (overrides the config)");
  sim->add_option("--threads", sim_opt.threads, "Worker threads")->capture_default_str();
  sim->add_option("--out-dir", sim_opt.out_dir, "Directory for <name>_summary.{csv,json}")->capture_default_str();
  sim->add_flag("--quiet", sim_opt.quiet, "No progress output");

  std::string synth_out;
  std::string synth_seed;
  auto* synth = app.add_subcommand("synth-design", "Write the frozen synthetic design as CSV");
  synth->add_option("--out", synth_out, "Output CSV (stdout when omitted)");
  synth->add_option("--seed", synth_seed, "Generator seed (default is the bundled design's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (fit->parsed()) return run_fit(fit_opt);
    if (sim->parsed()) {
      sim_opt.reps_given = reps->count() > 0;
      return run_simulate(sim_opt);
    }
    if (synth->parsed()) {
      const auto seed = synth_seed.empty() ? kSyntheticDesignSeed : parse_seed(synth_seed);
      std::ostringstream os;
      write_dataset_csv(os, make_synthetic_design(seed));
      if (synth_out.empty()) {
        std::cout << os.str();
      } else {
        write_file(synth_out, os.str());
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "metareg: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "metareg: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kUsage);
}
