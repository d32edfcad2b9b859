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

#ifndef METAREG_SIMULATION_HPP_
#define METAREG_SIMULATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metareg/effects.hpp"
#include "metareg/estimation.hpp"
#include "metareg/inference.hpp"
#include "metareg/model.hpp"
#include "metareg/random.hpp"

namespace metareg {

// Moderators and study sizes held fixed across replicates.
struct ScenarioDesign {
  std::vector<std::string> moderator_names;
  Eigen::MatrixXd centered;  // k x m, mean-centered over the retained rows
  std::vector<std::int64_t> study_sizes;
  std::vector<std::string> study_ids;

  std::size_t k() const noexcept { return study_sizes.size(); }
};

// Complete-case filtering on `moderators` followed by mean-centering.
ScenarioDesign scenario_design_from_dataset(const Dataset& dataset, const std::vector<std::string>& moderators);

struct Scenario {
  std::string name;
  // (b0, b1, b2, b12) for two moderators, (b0, b1) for one; absent terms are 0.
  std::vector<double> true_beta;
  double tau2 = 0.0;
  ScenarioDesign design;
  std::size_t n_reps = 10000;
  double level = 0.95;
  std::uint64_t master_seed = 0;
  std::vector<ModelSpec> fitted_specs;
  FitSettings fit_settings;

  // Labels of true_beta entries: intercept, moderators, interaction.
  std::vector<std::string> truth_labels() const;
  // True value for a named coefficient; 0 when the term is absent.
  double truth_for(const std::string& label) const;

  // Throws UsageError describing the first inconsistency.
  void validate() const;
};

struct ReplicateTruth {
  std::vector<double> u;
  std::vector<double> theta;
  std::vector<double> p;
  std::vector<std::int64_t> d;
};

struct Replicate {
  ReplicateTruth truth;
  std::vector<EffectData> effects;
};

Replicate generate_replicate(const Scenario& scenario, SeedSpec stream);

struct CoefficientSummary {
  std::string label;
  double truth = 0.0;
  double coverage = 0.0;
  double median_length = 0.0;
  double bias = 0.0;
};

struct SpecSummary {
  std::string model;
  std::size_t n_reps = 0;
  std::size_t n_converged = 0;
  std::size_t n_excluded = 0;
  std::size_t n_boundary = 0;
  // Empty when every replicate was excluded.
  std::vector<CoefficientSummary> coefficients;

  bool empty() const noexcept { return n_converged == 0; }
};

struct SimulationSummary {
  std::string scenario;
  std::uint64_t master_seed = 0;
  std::size_t n_reps = 0;
  double level = 0.95;
  std::vector<SpecSummary> specs;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Fraction of intervals with lower <= truth <= upper.
double coverage_metric(std::span<const Interval> intervals, double truth);
double median_length_metric(std::span<const Interval> intervals);
// Mean of (estimate - truth), Neumaier-compensated.
double bias_metric(std::span<const double> estimates, double truth);

// Called with the number of finished replicates; may be invoked from worker
// threads but never concurrently.
using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

// Output is bit-identical for every `parallelism` value.
SimulationSummary run_simulation(const Scenario& scenario, unsigned parallelism = 1,
                                 const ProgressCallback& progress = {});

inline constexpr std::uint64_t kSyntheticDesignSeed = 0x5EED2022ULL;
inline constexpr std::size_t kSyntheticStudies = 181;

// Frozen stand-in for the data example: 181 studies, sizes log-uniform on
// [50, 5000], year ~ N(2004, 7^2), age with sd 7 and correlation -0.35 to
// year, its spread widening with year (factor 1 + 0.16 z_year). The events
// column is one draw from the interaction-model data-generating process.
Dataset make_synthetic_design(std::uint64_t seed = kSyntheticDesignSeed);

}  // namespace metareg

#endif  // METAREG_SIMULATION_HPP_
