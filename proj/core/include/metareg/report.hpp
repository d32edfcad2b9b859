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

#ifndef METAREG_REPORT_HPP_
#define METAREG_REPORT_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "metareg/estimation.hpp"
#include "metareg/inference.hpp"
#include "metareg/simulation.hpp"

namespace metareg {

struct CoefficientReport {
  std::string label;
  double estimate = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int df = 0;

  bool operator==(const CoefficientReport&) const = default;
};

struct FitReport {
  std::string model;
  double level = 0.95;
  std::vector<CoefficientReport> coefficients;
  double tau2 = 0.0;
  double kh_scale = 0.0;
  std::size_t k = 0;
  std::size_t p = 0;
  int iterations = 0;
  double gradient = 0.0;
  bool boundary = false;
  std::string method;
  std::vector<std::string> moderators;
  std::vector<double> center_offsets;
  std::vector<double> medians;
  std::size_t dropped = 0;

  bool operator==(const FitReport&) const = default;
};

FitReport make_fit_report(const FitResult& fit, const ModelSpec& spec, double level);

std::string fit_report_to_json(const FitReport& report);
// Throws DataError on malformed input.
FitReport fit_report_from_json(const std::string& text);

void print_fit_table(std::ostream& out, const FitReport& report);

// Metric x coefficient rows, one column per fitted model, 4 decimals.
std::string summary_to_csv(const SimulationSummary& summary);
std::string summary_to_json(const SimulationSummary& summary);

// Prediction bands, one row per (moderator, grid node).
void write_band_csv(std::ostream& out, const std::vector<PredictionBand>& bands);

}  // namespace metareg

#endif  // METAREG_REPORT_HPP_
