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

#include "metareg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "metareg/errors.hpp"
#include "metareg/inference.hpp"

namespace metareg {
namespace {

constexpr double kMaxCondition = 1e12;

Eigen::VectorXd to_vector(std::span<const double> values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string column_name(std::span<const std::string> labels, Eigen::Index j) {
  if (j < static_cast<Eigen::Index>(labels.size())) return labels[static_cast<std::size_t>(j)];
  return "column " + std::to_string(j);
}

// Equilibrated condition check of X'WX; throws naming the columns that load
// on the near-null direction.
void check_conditioning(const Eigen::MatrixXd& xtwx, std::span<const std::string> labels) {
  const Eigen::Index p = xtwx.rows();
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double d = xtwx(j, j);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularDesignError({column_name(labels, j)}, std::numeric_limits<double>::infinity());
    }
    scale(j) = 1.0 / std::sqrt(d);
  }
  const Eigen::MatrixXd equilibrated = scale.asDiagonal() * xtwx * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(equilibrated);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(p - 1);
  const double condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (condition <= kMaxCondition) return;

  std::vector<std::string> offending;
  const Eigen::VectorXd null_dir = eig.eigenvectors().col(0);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::fabs(null_dir(j)) >= 0.1) offending.push_back(column_name(labels, j));
  }
  throw SingularDesignError(std::move(offending), condition);
}

std::vector<double> sampling_variances(std::span<const EffectData> effects) {
  std::vector<double> v;
  v.reserve(effects.size());
  for (const auto& e : effects) {
    if (!std::isfinite(e.y) || !std::isfinite(e.v) || !(e.v > 0.0)) {
      throw NumericalError("effect sizes must be finite with positive sampling variance");
    }
    v.push_back(e.v);
  }
  return v;
}

// Everything the REML iteration needs at one tau2 value.
struct RemlPoint {
  double tau2 = 0.0;
  double loglik = 0.0;
  double score = 0.0;
  double information = 0.0;
};

// With `orthonormal` set the design is replaced by the Q factor of its thin QR
// decomposition. That changes the log-likelihood by a constant only, and keeps
// uncentered designs with product terms well conditioned.
class RemlObjective {
 public:
  RemlObjective(const DesignMatrix& design, std::span<const EffectData> effects, bool orthonormal = false)
      : x_(design.values), labels_(design.column_labels) {
    const auto k = static_cast<Eigen::Index>(effects.size());
    if (k != x_.rows()) throw UsageError("effects do not align with design rows");
    if (x_.rows() <= x_.cols()) {
      throw InsufficientStudiesError(static_cast<std::size_t>(x_.rows()), static_cast<std::size_t>(x_.cols()));
    }
    y_.resize(k);
    v_.resize(k);
    const auto v = sampling_variances(effects);
    for (Eigen::Index i = 0; i < k; ++i) {
      y_(i) = effects[static_cast<std::size_t>(i)].y;
      v_(i) = v[static_cast<std::size_t>(i)];
    }
    if (orthonormal) {
      const Eigen::MatrixXd xtwx = x_.transpose() * v_.cwiseInverse().asDiagonal() * x_;
      check_conditioning(xtwx, labels_);
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x_);
      x_ = qr.householderQ() * Eigen::MatrixXd::Identity(x_.rows(), x_.cols());
    }
  }

  double max_v() const { return v_.maxCoeff(); }

  RemlPoint evaluate(double tau2, bool derivatives = true) const {
    if (!std::isfinite(tau2) || tau2 < 0.0) throw NumericalError("tau2 must be finite and nonnegative");
    const Eigen::ArrayXd w = 1.0 / (v_.array() + tau2);
    const Eigen::MatrixXd xtw = x_.transpose() * w.matrix().asDiagonal();
    const Eigen::MatrixXd xtwx = xtw * x_;
    check_conditioning(xtwx, labels_);
    const Eigen::LLT<Eigen::MatrixXd> llt(xtwx);
    if (llt.info() != Eigen::Success) throw SingularDesignError({}, std::numeric_limits<double>::infinity());
    const Eigen::VectorXd beta = llt.solve(xtw * y_);
    const Eigen::ArrayXd r = (y_ - x_ * beta).array();

    RemlPoint pt;
    pt.tau2 = tau2;
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    pt.loglik = -0.5 * ((v_.array() + tau2).log().sum() + log_det + (w * r.square()).sum());
    if (!derivatives) return pt;

    // P = W - W X A X' W with A = (X'WX)^-1.
    //   tr(P)  = sum w - tr(A X'W^2X)
    //   tr(PP) = sum w^2 - 2 tr(A X'W^3X) + tr(A B A B),  B = X'W^2X
    //   y'PPy  = sum w^2 r^2
    const Eigen::MatrixXd a = llt.solve(Eigen::MatrixXd::Identity(x_.cols(), x_.cols()));
    const Eigen::MatrixXd b = x_.transpose() * w.square().matrix().asDiagonal() * x_;
    const Eigen::MatrixXd c = x_.transpose() * w.cube().matrix().asDiagonal() * x_;
    const Eigen::MatrixXd ab = a * b;
    const double tr_p = w.sum() - ab.trace();
    const double tr_pp = w.square().sum() - 2.0 * (a * c).trace() + (ab * ab).trace();
    const double ypp_y = (w.square() * r.square()).sum();
    pt.score = 0.5 * (ypp_y - tr_p);
    pt.information = 0.5 * tr_pp;
    if (!std::isfinite(pt.loglik) || !std::isfinite(pt.score) || !std::isfinite(pt.information)) {
      throw NumericalError("restricted log-likelihood is not finite at tau2 = " + std::to_string(tau2));
    }
    return pt;
  }

 private:
  Eigen::MatrixXd x_;
  std::span<const std::string> labels_;
  Eigen::VectorXd y_;
  Eigen::VectorXd v_;
};

// Bounded derivative-free maximization. A coarse scan picks the bracket so a
// secondary local mode cannot capture Brent's search.
RemlResult bounded_reml(const RemlObjective& objective, double tau2_max, int iterations_so_far) {
  constexpr int kScan = 64;
  std::vector<double> nodes;
  nodes.reserve(kScan + 1);
  nodes.push_back(0.0);
  const double lo_scale = std::max(tau2_max * 1e-8, 1e-12);
  for (int i = 0; i < kScan; ++i) {
    nodes.push_back(lo_scale * std::pow(tau2_max / lo_scale, static_cast<double>(i) / (kScan - 1)));
  }
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double ll = objective.evaluate(nodes[i], false).loglik;
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  const double lo = best == 0 ? 0.0 : nodes[best - 1];
  const double hi = best + 1 < nodes.size() ? nodes[best + 1] : tau2_max;

  std::uintmax_t max_iter = 500;
  const auto [arg, neg_ll] = boost::math::tools::brent_find_minima(
      [&](double t) { return -objective.evaluate(t, false).loglik; }, lo, hi,
      std::numeric_limits<double>::digits / 2 + 4, max_iter);
  double tau2 = arg;
  // Brent never evaluates the endpoints themselves.
  for (double endpoint : {lo, hi}) {
    if (objective.evaluate(endpoint, false).loglik > -neg_ll) tau2 = endpoint;
  }

  RemlResult result;
  result.tau2 = tau2;
  const RemlPoint pt = objective.evaluate(tau2);
  result.convergence.iterations = iterations_so_far + static_cast<int>(max_iter);
  result.convergence.gradient = std::fabs(pt.score);
  result.convergence.boundary = tau2 <= 0.0 || tau2 >= tau2_max;
  result.convergence.method = RemlMethod::kBoundedFallback;
  return result;
}

}  // namespace

WlsResult wls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                  std::span<const std::string> labels) {
  const Eigen::Index k = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != k || weights.size() != k) throw UsageError("wls_fit: y and weights must have one entry per row");
  if (k < p) throw InsufficientStudiesError(static_cast<std::size_t>(k), static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(weights(i) > 0.0) || !std::isfinite(weights(i))) {
      throw NumericalError("wls_fit: weights must be strictly positive and finite");
    }
  }
  const Eigen::MatrixXd xtw = x.transpose() * weights.asDiagonal();
  const Eigen::MatrixXd xtwx = xtw * x;
  check_conditioning(xtwx, labels);
  const Eigen::LLT<Eigen::MatrixXd> llt(xtwx);
  if (llt.info() != Eigen::Success) throw SingularDesignError({}, std::numeric_limits<double>::infinity());

  WlsResult out;
  out.beta = llt.solve(xtw * y);
  out.cov_unscaled = llt.solve(Eigen::MatrixXd::Identity(p, p));
  out.cov_unscaled = 0.5 * (out.cov_unscaled + out.cov_unscaled.transpose()).eval();
  out.residuals = y - x * out.beta;
  return out;
}

WlsResult wls_fit(const DesignMatrix& design, std::span<const double> y, std::span<const double> weights) {
  return wls_fit(design.values, to_vector(y), to_vector(weights), design.column_labels);
}

double restricted_loglik(double tau2, const DesignMatrix& design, std::span<const EffectData> effects) {
  return RemlObjective(design, effects).evaluate(tau2, false).loglik;
}

double dl_tau2(const DesignMatrix& design, std::span<const EffectData> effects) {
  const Eigen::Index k = design.rows();
  const Eigen::Index p = design.cols();
  if (static_cast<Eigen::Index>(effects.size()) != k) throw UsageError("effects do not align with design rows");
  if (k <= p) throw InsufficientStudiesError(static_cast<std::size_t>(k), static_cast<std::size_t>(p));
  const auto v = sampling_variances(effects);
  Eigen::VectorXd y(k);
  Eigen::VectorXd w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    y(i) = effects[static_cast<std::size_t>(i)].y;
    w(i) = 1.0 / v[static_cast<std::size_t>(i)];
  }
  const WlsResult fe = wls_fit(design.values, y, w, design.column_labels);
  const double q = (w.array() * fe.residuals.array().square()).sum();
  const Eigen::MatrixXd xtw2x = design.values.transpose() * w.array().square().matrix().asDiagonal() * design.values;
  const double denom = w.sum() - (fe.cov_unscaled * xtw2x).trace();
  if (!(denom > 0.0)) return 0.0;
  return std::max(0.0, (q - static_cast<double>(k - p)) / denom);
}

RemlResult reml_tau2(const DesignMatrix& design, std::span<const EffectData> effects, const RemlSettings& settings) {
  const RemlObjective objective(design, effects, true);
  const double tau2_max = settings.tau2_max.value_or(100.0 * objective.max_v());
  if (!(tau2_max > 0.0)) throw UsageError("tau2_max must be positive");

  double tau2 = std::clamp(dl_tau2(design, effects), 0.0, tau2_max);
  RemlPoint current = objective.evaluate(tau2);

  int sign_flips = 0;
  double last_step = 0.0;
  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    const double full_step = current.score / current.information;
    double candidate = std::clamp(tau2 + full_step, 0.0, tau2_max);
    if (candidate == tau2) {
      // Pinned at an endpoint with the score pointing outward, or a step
      // below double resolution.
      RemlResult result;
      result.tau2 = tau2;
      result.convergence = {iter, std::fabs(current.score), tau2 <= 0.0 || tau2 >= tau2_max,
                            RemlMethod::kFisherScoring};
      return result;
    }

    RemlPoint next = objective.evaluate(candidate);
    int halvings = 0;
    const double slack = 1e-12 * (1.0 + std::fabs(current.loglik));
    while (next.loglik < current.loglik - slack && halvings < 30) {
      candidate = tau2 + 0.5 * (candidate - tau2);
      next = objective.evaluate(candidate);
      ++halvings;
    }
    if (next.loglik < current.loglik - slack) return bounded_reml(objective, tau2_max, iter);

    const double step = candidate - tau2;
    if (last_step != 0.0 && std::signbit(step) != std::signbit(last_step) &&
        std::fabs(step) >= 0.5 * std::fabs(last_step)) {
      if (++sign_flips >= 4) return bounded_reml(objective, tau2_max, iter);
    } else {
      sign_flips = 0;
    }
    last_step = step;
    tau2 = candidate;
    current = next;

    const bool small_step = halvings == 0 && std::fabs(step) <= settings.tol * (1.0 + tau2);
    if (small_step || std::fabs(current.score) <= settings.tol) {
      RemlResult result;
      result.tau2 = tau2;
      result.convergence = {iter, std::fabs(current.score), tau2 <= 0.0 || tau2 >= tau2_max,
                            RemlMethod::kFisherScoring};
      return result;
    }
  }
  throw NonConvergenceError(tau2, settings.max_iter);
}

RemlResult reml_tau2_bounded(const DesignMatrix& design, std::span<const EffectData> effects,
                             const RemlSettings& settings) {
  const RemlObjective objective(design, effects, true);
  const double tau2_max = settings.tau2_max.value_or(100.0 * objective.max_v());
  if (!(tau2_max > 0.0)) throw UsageError("tau2_max must be positive");
  return bounded_reml(objective, tau2_max, 0);
}

FitResult fit_design(const DesignMatrix& design, std::span<const EffectData> effects, const FitSettings& settings) {
  const auto k = static_cast<std::size_t>(design.rows());
  const auto p = static_cast<std::size_t>(design.cols());
  if (effects.size() != k) throw UsageError("effects do not align with design rows");
  if (k <= p) throw InsufficientStudiesError(k, p);
  for (Eigen::Index j = 1; j < design.cols(); ++j) {
    const auto col = design.values.col(j);
    if (col.maxCoeff() == col.minCoeff()) {
      throw SingularDesignError({column_name(design.column_labels, j) + " (zero variance)"},
                                std::numeric_limits<double>::infinity());
    }
  }

  const RemlResult reml = reml_tau2(design, effects, settings.reml);

  Eigen::VectorXd y(static_cast<Eigen::Index>(k));
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    y(static_cast<Eigen::Index>(i)) = effects[i].y;
    w(static_cast<Eigen::Index>(i)) = 1.0 / (effects[i].v + reml.tau2);
  }
  WlsResult wls = wls_fit(design.values, y, w, design.column_labels);

  FitResult fit;
  fit.beta = std::move(wls.beta);
  fit.tau2 = reml.tau2;
  fit.cov_unscaled = std::move(wls.cov_unscaled);
  fit.weights = std::move(w);
  fit.residuals = std::move(wls.residuals);
  fit.kh_scale = kh_scale(std::span<const double>(fit.residuals.data(), k),
                          std::span<const double>(fit.weights.data(), k), k, p);
  if (settings.truncate_kh) fit.kh_scale = std::max(1.0, fit.kh_scale);
  fit.degenerate_scale = fit.kh_scale == 0.0;
  fit.df = static_cast<int>(k - p);
  fit.convergence = reml.convergence;
  fit.column_labels = design.column_labels;
  fit.moderators = design.moderators;
  fit.interaction = design.interaction;
  fit.center_offsets = design.center_offsets;
  fit.other_medians = design.other_medians;
  return fit;
}

FitResult fit_model(const Dataset& dataset, const ModelSpec& spec, std::span<const EffectData> effects,
                    const FitSettings& settings) {
  if (effects.size() != dataset.size()) throw UsageError("effects must have one entry per dataset study");
  BuiltDesign built = build_design(dataset, spec);
  std::vector<EffectData> retained;
  retained.reserve(built.rows.retained.size());
  for (std::size_t i : built.rows.retained) retained.push_back(effects[i]);
  FitResult fit = fit_design(built.design, retained, settings);
  fit.rows = std::move(built.rows);
  return fit;
}

std::vector<EffectData> dataset_effects(const Dataset& dataset) {
  std::vector<EffectData> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.studies()) out.push_back(logit_effect(s.events, s.total));
  return out;
}

}  // namespace metareg
