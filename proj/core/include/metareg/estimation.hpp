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

#ifndef METAREG_ESTIMATION_HPP_
#define METAREG_ESTIMATION_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metareg/effects.hpp"
#include "metareg/model.hpp"

namespace metareg {

struct RemlSettings {
  double tol = 1e-8;
  int max_iter = 100;
  // Upper end of the search interval; 100 * max(v_i) when unset.
  std::optional<double> tau2_max;
};

struct FitSettings {
  RemlSettings reml;
  // Floor the Knapp-Hartung factor at 1 (opt-in; off by default).
  bool truncate_kh = false;
};

enum class RemlMethod { kFisherScoring, kBoundedFallback };

struct Convergence {
  int iterations = 0;
  double gradient = 0.0;
  bool boundary = false;
  RemlMethod method = RemlMethod::kFisherScoring;
};

struct WlsResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_unscaled;
  Eigen::VectorXd residuals;
};

struct RemlResult {
  double tau2 = 0.0;
  Convergence convergence;
};

struct FitResult {
  Eigen::VectorXd beta;
  double tau2 = 0.0;
  Eigen::MatrixXd cov_unscaled;
  Eigen::VectorXd weights;
  Eigen::VectorXd residuals;
  double kh_scale = 0.0;
  int df = 0;
  Convergence convergence;

  // Set when the KH factor was exactly zero and standard errors were floored.
  bool degenerate_scale = false;

  // Describes the design the fit was computed on.
  std::vector<std::string> column_labels;
  std::vector<std::string> moderators;
  bool interaction = false;
  std::vector<double> center_offsets;
  std::vector<double> other_medians;
  RowIndexMap rows;

  std::size_t k() const noexcept { return static_cast<std::size_t>(residuals.size()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(beta.size()); }
};

// Weighted least squares through a Cholesky factorization of X'WX.
// Throws InsufficientStudiesError when k < p and SingularDesignError when the
// equilibrated X'WX has a condition number beyond 1e12.
WlsResult wls_fit(const DesignMatrix& design, std::span<const double> y,
                  std::span<const double> weights);
WlsResult wls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                  std::span<const std::string> labels = {});

// -1/2 [sum log(v_i + tau2) + log det(X'WX) + sum w_i r_i^2], constants dropped.
double restricted_loglik(double tau2, const DesignMatrix& design, std::span<const EffectData> effects);

// Method-of-moments start value (generalized DerSimonian-Laird).
double dl_tau2(const DesignMatrix& design, std::span<const EffectData> effects);

RemlResult reml_tau2(const DesignMatrix& design, std::span<const EffectData> effects,
                     const RemlSettings& settings = {});

// REML + WLS + Knapp-Hartung on an already built design. `effects` is aligned
// with the design rows.
FitResult fit_design(const DesignMatrix& design, std::span<const EffectData> effects,
                     const FitSettings& settings = {});

// The derivative-free route on its own: coarse log-spaced scan of
// [0, tau2_max] followed by Brent's method in the best bracket. reml_tau2 falls
// back to this when Fisher scoring stalls.
RemlResult reml_tau2_bounded(const DesignMatrix& design, std::span<const EffectData> effects,
                             const RemlSettings& settings = {});

// build_design + fit_design. `effects` is aligned with the dataset studies;
// rows dropped by complete-case filtering are skipped.
FitResult fit_model(const Dataset& dataset, const ModelSpec& spec, std::span<const EffectData> effects,
                    const FitSettings& settings = {});

// logit_effect applied to every study of the dataset.
std::vector<EffectData> dataset_effects(const Dataset& dataset);

}  // namespace metareg

#endif  // METAREG_ESTIMATION_HPP_
