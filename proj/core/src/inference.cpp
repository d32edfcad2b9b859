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

#include "metareg/inference.hpp"

#include <algorithm>
#include <cmath>

#include "metareg/errors.hpp"
#include "metareg/special_functions.hpp"

namespace metareg {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("confidence level must lie in (0, 1) (got " + std::to_string(level) + ")");
  }
}

double critical_value(double level, int df) { return t_quantile(1.0 - 0.5 * (1.0 - level), df); }

}  // namespace

double kh_scale(std::span<const double> residuals, std::span<const double> weights, std::size_t k, std::size_t p) {
  if (k <= p) throw InsufficientStudiesError(k, p);
  if (residuals.size() != k || weights.size() != k) throw UsageError("kh_scale: residuals and weights must have k entries");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += weights[i] * residuals[i] * residuals[i];
  return sum / static_cast<double>(k - p);
}

std::vector<ConfidenceInterval> confidence_intervals(const FitResult& fit, double level) {
  check_level(level);
  const double t = critical_value(level, fit.df);
  std::vector<ConfidenceInterval> out;
  out.reserve(fit.p());
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    ConfidenceInterval ci;
    ci.label = static_cast<std::size_t>(j) < fit.column_labels.size() ? fit.column_labels[static_cast<std::size_t>(j)]
                                                                     : "b" + std::to_string(j);
    ci.estimate = fit.beta(j);
    ci.level = level;
    ci.df = fit.df;
    ci.std_error = std::max(kMinStdError, std::sqrt(fit.kh_scale * fit.cov_unscaled(j, j)));
    ci.lower = ci.estimate - t * ci.std_error;
    ci.upper = ci.estimate + t * ci.std_error;
    out.push_back(std::move(ci));
  }
  return out;
}

PredictionBand predict_at(const FitResult& fit, const std::string& moderator, std::span<const double> grid,
                          const std::map<std::string, double>& others_at, double level) {
  check_level(level);
  const auto it = std::find(fit.moderators.begin(), fit.moderators.end(), moderator);
  if (it == fit.moderators.end()) throw UsageError("predict_at: moderator '" + moderator + "' is not in the model");
  const auto target = static_cast<std::size_t>(it - fit.moderators.begin());

  PredictionBand band;
  band.moderator = moderator;
  std::vector<double> fixed(fit.moderators.size(), 0.0);
  for (std::size_t j = 0; j < fit.moderators.size(); ++j) {
    if (j == target) continue;
    const auto& name = fit.moderators[j];
    const auto found = others_at.find(name);
    fixed[j] = found != others_at.end() ? found->second
                                        : (j < fit.other_medians.size() ? fit.other_medians[j] : 0.0);
    band.fixed_at[name] = fixed[j];
  }
  for (const auto& [name, value] : others_at) {
    if (std::find(fit.moderators.begin(), fit.moderators.end(), name) == fit.moderators.end()) {
      throw UsageError("predict_at: moderator '" + name + "' is not in the model");
    }
  }

  const double t = critical_value(level, fit.df);
  const auto p = static_cast<Eigen::Index>(fit.p());
  Eigen::VectorXd row(p);
  band.grid.reserve(grid.size());
  for (double x : grid) {
    row(0) = 1.0;
    std::vector<double> values = fixed;
    values[target] = x;
    for (std::size_t j = 0; j < values.size(); ++j) row(static_cast<Eigen::Index>(j) + 1) = values[j];
    if (fit.interaction) row(p - 1) = values[0] * values[1];
    const double pred = row.dot(fit.beta);
    const double se = std::max(kMinStdError, std::sqrt(fit.kh_scale * row.dot(fit.cov_unscaled * row)));
    band.grid.push_back({x, pred, pred - t * se, pred + t * se});
  }
  return band;
}

}  // namespace metareg
