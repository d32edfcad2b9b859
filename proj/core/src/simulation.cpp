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

#include "metareg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "metareg/errors.hpp"

namespace metareg {
namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

Eigen::Index moderator_column(const ScenarioDesign& design, const std::string& name) {
  const auto it = std::find(design.moderator_names.begin(), design.moderator_names.end(), name);
  if (it == design.moderator_names.end()) {
    throw UsageError("moderator '" + name + "' is not part of the scenario design");
  }
  return static_cast<Eigen::Index>(it - design.moderator_names.begin());
}

// The scenario design is already centered, so fitted designs use it as is.
DesignMatrix design_for_spec(const ScenarioDesign& design, const ModelSpec& spec) {
  spec.validate();
  const auto k = static_cast<Eigen::Index>(design.k());
  const auto m = static_cast<Eigen::Index>(spec.moderators.size());
  DesignMatrix d;
  d.values.resize(k, 1 + m + (spec.interaction ? 1 : 0));
  d.values.col(0).setOnes();
  for (Eigen::Index j = 0; j < m; ++j) {
    d.values.col(j + 1) = design.centered.col(moderator_column(design, spec.moderators[static_cast<std::size_t>(j)]));
  }
  if (spec.interaction) d.values.col(3) = d.values.col(1).cwiseProduct(d.values.col(2));
  d.column_labels = spec.coefficient_labels();
  d.moderators = spec.moderators;
  d.interaction = spec.interaction;
  d.center_offsets.assign(spec.moderators.size(), 0.0);
  d.other_medians = column_medians(d);
  return d;
}

Eigen::MatrixXd truth_design(const Scenario& scenario) {
  const auto& design = scenario.design;
  const auto k = static_cast<Eigen::Index>(design.k());
  const auto m = design.centered.cols();
  Eigen::MatrixXd x(k, static_cast<Eigen::Index>(scenario.true_beta.size()));
  x.col(0).setOnes();
  for (Eigen::Index j = 0; j < m; ++j) x.col(j + 1) = design.centered.col(j);
  if (m == 2) x.col(3) = design.centered.col(0).cwiseProduct(design.centered.col(1));
  return x;
}

}  // namespace

ScenarioDesign scenario_design_from_dataset(const Dataset& dataset, const std::vector<std::string>& moderators) {
  if (moderators.empty() || moderators.size() > 2) {
    throw UsageError("a scenario design needs one or two moderators");
  }
  ModelSpec spec;
  spec.moderators = moderators;
  spec.centering = Centering::kMean;
  const BuiltDesign built = build_design(dataset, spec);

  ScenarioDesign out;
  out.moderator_names = moderators;
  out.centered = built.design.values.rightCols(static_cast<Eigen::Index>(moderators.size()));
  for (std::size_t i : built.rows.retained) {
    out.study_sizes.push_back(dataset.studies()[i].total);
    out.study_ids.push_back(dataset.studies()[i].study_id);
  }
  return out;
}

std::vector<std::string> Scenario::truth_labels() const {
  ModelSpec full;
  full.moderators = design.moderator_names;
  full.interaction = design.moderator_names.size() == 2;
  return full.coefficient_labels();
}

double Scenario::truth_for(const std::string& label) const {
  const auto labels = truth_labels();
  for (std::size_t i = 0; i < labels.size() && i < true_beta.size(); ++i) {
    if (labels[i] == label) return true_beta[i];
  }
  return 0.0;
}

void Scenario::validate() const {
  if (n_reps < 1) throw UsageError("scenario '" + name + "': reps must be >= 1");
  if (!(tau2 >= 0.0) || !std::isfinite(tau2)) throw UsageError("scenario '" + name + "': tau2 must be finite and >= 0");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("scenario '" + name + "': level must lie in (0, 1)");
  const auto m = design.moderator_names.size();
  if (m < 1 || m > 2) throw UsageError("scenario '" + name + "': design needs one or two moderators");
  if (design.k() == 0) throw UsageError("scenario '" + name + "': design has no studies");
  if (static_cast<std::size_t>(design.centered.rows()) != design.k() ||
      static_cast<std::size_t>(design.centered.cols()) != m) {
    throw UsageError("scenario '" + name + "': study sizes do not match the design rows");
  }
  for (auto n : design.study_sizes) {
    if (n < 1) throw UsageError("scenario '" + name + "': study sizes must be >= 1");
  }
  const auto labels = truth_labels();
  if (true_beta.size() != labels.size()) {
    throw UsageError("scenario '" + name + "': beta needs " + std::to_string(labels.size()) + " values, got " +
                     std::to_string(true_beta.size()));
  }
  for (double b : true_beta) {
    if (!std::isfinite(b)) throw UsageError("scenario '" + name + "': beta values must be finite");
  }
  if (fitted_specs.empty()) throw UsageError("scenario '" + name + "': no fitted models given");
  for (const auto& spec : fitted_specs) {
    spec.validate();
    for (const auto& mod : spec.moderators) moderator_column(design, mod);
  }
}

Replicate generate_replicate(const Scenario& scenario, SeedSpec stream) {
  const Eigen::MatrixXd x = truth_design(scenario);
  const Eigen::VectorXd beta =
      Eigen::Map<const Eigen::VectorXd>(scenario.true_beta.data(), static_cast<Eigen::Index>(scenario.true_beta.size()));
  const Eigen::VectorXd linear = x * beta;
  const double tau = std::sqrt(scenario.tau2);
  const std::size_t k = scenario.design.k();

  Rng rng(stream);
  Replicate rep;
  auto& t = rep.truth;
  t.u.resize(k);
  t.theta.resize(k);
  t.p.resize(k);
  t.d.resize(k);
  rep.effects.resize(k);
  for (std::size_t i = 0; i < k; ++i) t.u[i] = tau * normal(rng);
  for (std::size_t i = 0; i < k; ++i) {
    t.theta[i] = linear(static_cast<Eigen::Index>(i)) + t.u[i];
    t.p[i] = expit(t.theta[i]);
    t.d[i] = binomial(rng, scenario.design.study_sizes[i], t.p[i]);
    rep.effects[i] = logit_effect(t.d[i], scenario.design.study_sizes[i]);
  }
  return rep;
}

double coverage_metric(std::span<const Interval> intervals, double truth) {
  if (intervals.empty()) throw UsageError("coverage of an empty interval sequence");
  std::size_t hits = 0;
  for (const auto& iv : intervals) hits += (iv.lower <= truth && truth <= iv.upper) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

double median_length_metric(std::span<const Interval> intervals) {
  if (intervals.empty()) throw UsageError("median length of an empty interval sequence");
  std::vector<double> lengths;
  lengths.reserve(intervals.size());
  for (const auto& iv : intervals) lengths.push_back(iv.upper - iv.lower);
  return median(lengths);
}

double bias_metric(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw UsageError("bias of an empty estimate sequence");
  CompensatedSum sum;
  for (double e : estimates) sum.add(e - truth);
  return sum.value() / static_cast<double>(estimates.size());
}

SimulationSummary run_simulation(const Scenario& scenario, unsigned parallelism, const ProgressCallback& progress) {
  scenario.validate();
  const std::size_t reps = scenario.n_reps;
  const std::size_t n_specs = scenario.fitted_specs.size();

  std::vector<DesignMatrix> designs;
  designs.reserve(n_specs);
  for (const auto& spec : scenario.fitted_specs) designs.push_back(design_for_spec(scenario.design, spec));

  // Per spec: reps x p estimates and bounds, filled by replicate index.
  struct SpecRecords {
    std::vector<char> converged;
    std::vector<char> boundary;
    Eigen::MatrixXd estimate;
    Eigen::MatrixXd lower;
    Eigen::MatrixXd upper;
  };
  std::vector<SpecRecords> records(n_specs);
  for (std::size_t s = 0; s < n_specs; ++s) {
    const auto p = designs[s].cols();
    records[s].converged.assign(reps, 0);
    records[s].boundary.assign(reps, 0);
    records[s].estimate.resize(static_cast<Eigen::Index>(reps), p);
    records[s].lower.resize(static_cast<Eigen::Index>(reps), p);
    records[s].upper.resize(static_cast<Eigen::Index>(reps), p);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      const Replicate rep = generate_replicate(scenario, SeedSpec{scenario.master_seed, r});
      for (std::size_t s = 0; s < n_specs; ++s) {
        try {
          const FitResult fit = fit_design(designs[s], rep.effects, scenario.fit_settings);
          const auto cis = confidence_intervals(fit, scenario.level);
          const auto row = static_cast<Eigen::Index>(r);
          for (std::size_t j = 0; j < cis.size(); ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            records[s].estimate(row, col) = cis[j].estimate;
            records[s].lower(row, col) = cis[j].lower;
            records[s].upper(row, col) = cis[j].upper;
          }
          records[s].converged[r] = 1;
          records[s].boundary[r] = fit.convergence.boundary ? 1 : 0;
        } catch (const NumericalError&) {
          records[s].converged[r] = 0;
        }
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, reps);
      }
    }
  };
  auto worker = [&] {
    try {
      work();
    } catch (...) {
      std::lock_guard lock(progress_mutex);
      if (!failure) failure = std::current_exception();
      next.store(reps);
    }
  };

  const unsigned threads = std::max(1u, parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SimulationSummary summary;
  summary.scenario = scenario.name;
  summary.master_seed = scenario.master_seed;
  summary.n_reps = reps;
  summary.level = scenario.level;
  for (std::size_t s = 0; s < n_specs; ++s) {
    const auto& rec = records[s];
    SpecSummary out;
    out.model = scenario.fitted_specs[s].describe();
    out.n_reps = reps;
    std::vector<Eigen::Index> ok;
    for (std::size_t r = 0; r < reps; ++r) {
      if (rec.converged[r]) {
        ok.push_back(static_cast<Eigen::Index>(r));
        out.n_boundary += rec.boundary[r] ? 1 : 0;
      }
    }
    out.n_converged = ok.size();
    out.n_excluded = reps - ok.size();
    if (!ok.empty()) {
      for (Eigen::Index j = 0; j < designs[s].cols(); ++j) {
        CoefficientSummary c;
        c.label = designs[s].column_labels[static_cast<std::size_t>(j)];
        c.truth = scenario.truth_for(c.label);
        std::vector<Interval> intervals;
        std::vector<double> estimates;
        intervals.reserve(ok.size());
        estimates.reserve(ok.size());
        for (Eigen::Index r : ok) {
          intervals.push_back({rec.lower(r, j), rec.upper(r, j)});
          estimates.push_back(rec.estimate(r, j));
        }
        c.coverage = coverage_metric(intervals, c.truth);
        c.median_length = median_length_metric(intervals);
        c.bias = bias_metric(estimates, c.truth);
        out.coefficients.push_back(std::move(c));
      }
    }
    summary.specs.push_back(std::move(out));
  }
  return summary;
}

Dataset make_synthetic_design(std::uint64_t seed) {
  constexpr double kCorrelation = -0.35;
  constexpr double kYearMean = 2004.0;
  constexpr double kYearSd = 7.0;
  constexpr double kAgeMean = 71.0;
  constexpr double kAgeSd = 7.0;
  // Age dispersion grows with recruitment year; gives the design the
  // co-skewness E[year * age^2] > 0 through which an omitted interaction
  // biases the age coefficient.
  constexpr double kAgeSpreadTrend = 0.16;
  const double log_lo = std::log(50.0);
  const double log_hi = std::log(5000.0);

  Rng rng(SeedSpec{seed, 0});
  std::vector<StudyRecord> studies(kSyntheticStudies);
  for (std::size_t i = 0; i < kSyntheticStudies; ++i) {
    auto& s = studies[i];
    char id[16];
    std::snprintf(id, sizeof id, "SYN%03zu", i + 1);
    s.study_id = id;
    s.total = static_cast<std::int64_t>(std::llround(std::exp(log_lo + (log_hi - log_lo) * rng.uniform())));
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double year = kYearMean + kYearSd * z1;
    const double resid_sd = std::sqrt(1.0 - kCorrelation * kCorrelation);
    const double norm = std::sqrt(kCorrelation * kCorrelation +
                                  resid_sd * resid_sd * (1.0 + kAgeSpreadTrend * kAgeSpreadTrend));
    const double age =
        kAgeMean + kAgeSd * (kCorrelation * z1 + resid_sd * z2 * (1.0 + kAgeSpreadTrend * z1)) / norm;
    s.moderators["year"] = std::round(year * 2.0) / 2.0;
    s.moderators["age"] = std::round(age * 10.0) / 10.0;
  }
  Dataset dataset(studies, {"year", "age"});

  // One draw of the interaction-model outcome so the file also works as a
  // fit input.
  Scenario truth;
  truth.name = "synthetic-events";
  truth.true_beta = {-1.1477, -0.0066, 0.0333, -0.0018};
  truth.tau2 = 0.2484;
  truth.design = scenario_design_from_dataset(dataset, {"year", "age"});
  const Replicate rep = generate_replicate(truth, SeedSpec{seed, 1});
  for (std::size_t i = 0; i < kSyntheticStudies; ++i) studies[i].events = rep.truth.d[i];
  return Dataset(std::move(studies), {"year", "age"});
}

}  // namespace metareg
