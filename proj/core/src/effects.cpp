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

#include "metareg/effects.hpp"

#include <cmath>
#include <string>

#include "metareg/errors.hpp"

namespace metareg {

EffectData logit_effect(std::int64_t events, std::int64_t total) {
  if (total < 1) throw DataError("total must be >= 1 (got " + std::to_string(total) + ")");
  if (events < 0 || events > total) {
    throw DataError("events must lie in [0, total] (got " + std::to_string(events) + " of " + std::to_string(total) +
                    ")");
  }
  const double a = static_cast<double>(events) + 0.5;
  const double b = static_cast<double>(total - events) + 0.5;
  return {std::log(a / b), 1.0 / a + 1.0 / b};
}

double expit(double theta) noexcept {
  if (theta >= 0.0) return 1.0 / (1.0 + std::exp(-theta));
  const double e = std::exp(theta);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

}  // namespace metareg
