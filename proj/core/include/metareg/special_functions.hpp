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

#ifndef METAREG_SPECIAL_FUNCTIONS_HPP_
#define METAREG_SPECIAL_FUNCTIONS_HPP_

namespace metareg {

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

// Inverse Student-t CDF. Throws UsageError unless 0 < prob < 1 and df > 0.
double t_quantile(double prob, double df);

// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double prob);

}  // namespace metareg

#endif  // METAREG_SPECIAL_FUNCTIONS_HPP_
