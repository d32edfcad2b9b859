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

#ifndef METAREG_EFFECTS_HPP_
#define METAREG_EFFECTS_HPP_

#include <cstdint>

namespace metareg {

// Logit-scale outcome with its known sampling variance.
struct EffectData {
  double y = 0.0;
  double v = 1.0;
};

// y = log((d + 0.5) / (n - d + 0.5)), v = 1/(d + 0.5) + 1/(n - d + 0.5).
// The 0.5 correction is applied unconditionally.
EffectData logit_effect(std::int64_t events, std::int64_t total);

double expit(double theta) noexcept;

// Uncorrected log-odds.
double logit(double p) noexcept;

}  // namespace metareg

#endif  // METAREG_EFFECTS_HPP_
