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

#ifndef METAREG_INFERENCE_HPP_
#define METAREG_INFERENCE_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "metareg/estimation.hpp"

namespace metareg {

struct ConfidenceInterval {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  int df = 1;
  double std_error = 0.0;

  double width() const noexcept { return upper - lower; }
  // Closed endpoints.
  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
};

struct BandPoint {
  double x = 0.0;
  double prediction = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct PredictionBand {
  std::string moderator;
  std::vector<BandPoint> grid;
  std::map<std::string, double> fixed_at;
};

inline constexpr double kMinStdError = 1e-12;

// Knapp-Hartung factor q = sum w_i r_i^2 / (k - p). Throws
// InsufficientStudiesError when k <= p.
double kh_scale(std::span<const double> residuals, std::span<const double> weights, std::size_t k,
                std::size_t p);

std::vector<ConfidenceInterval> confidence_intervals(const FitResult& fit, double level = 0.95);

// Grid values are on the centered scale. Moderators missing from `others_at`
// are held at the fit's column medians.
PredictionBand predict_at(const FitResult& fit, const std::string& moderator,
                          std::span<const double> grid, const std::map<std::string, double>& others_at = {},
                          double level = 0.95);

}  // namespace metareg

#endif  // METAREG_INFERENCE_HPP_
