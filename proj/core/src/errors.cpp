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

#include "metareg/errors.hpp"

#include <sstream>

namespace metareg {
namespace {

std::string singular_message(const std::vector<std::string>& columns, double condition) {
  std::ostringstream os;
  os << "singular design: X'WX is numerically rank deficient (condition " << condition << ")";
  if (!columns.empty()) {
    os << "; offending columns:";
    for (const auto& c : columns) os << ' ' << c;
  }
  return os.str();
}

}  // namespace

SingularDesignError::SingularDesignError(std::vector<std::string> columns, double condition)
    : NumericalError(singular_message(columns, condition)),
      columns_(std::move(columns)),
      condition_(condition) {}

InsufficientStudiesError::InsufficientStudiesError(std::size_t k, std::size_t p)
    : NumericalError("insufficient studies: k = " + std::to_string(k) + " but the model has p = " +
                     std::to_string(p) + " coefficients; need k > p for residual degrees of freedom"),
      k_(k),
      p_(p) {}

NonConvergenceError::NonConvergenceError(double last_tau2, int iterations)
    : NumericalError("REML did not converge after " + std::to_string(iterations) +
                     " iterations (last tau2 = " + std::to_string(last_tau2) + ")"),
      last_tau2_(last_tau2),
      iterations_(iterations) {}

}  // namespace metareg
