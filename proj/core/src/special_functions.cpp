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

#include "metareg/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "metareg/errors.hpp"

namespace metareg {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Continued fraction for I_x(a, b) by the modified Lentz method; converges
// quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction failed to converge");
}

// x^a y^b / (a B(a, b))
double beta_prefactor(double a, double b, double x, double y) {
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(a * std::log(x) + b * std::log(y) - log_beta) / a;
}

// P(T > t) for t >= 0.
double t_upper_tail(double t, double df) {
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return 0.5 * incomplete_beta(0.5 * df, 0.5, x, y);
}

double t_density(double t, double df) {
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

}  // namespace

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw UsageError("incomplete beta requires 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return beta_prefactor(a, b, x, y) * beta_continued_fraction(a, b, x);
  return 1.0 - beta_prefactor(b, a, y, x) * beta_continued_fraction(b, a, y);
}

double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw UsageError("Student-t requires df > 0");
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = t_upper_tail(std::fabs(t), df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw UsageError("t quantile requires 0 < prob < 1 (got " + std::to_string(prob) + ")");
  }
  if (!(df > 0.0)) throw UsageError("t quantile requires df > 0");
  if (prob == 0.5) return 0.0;

  // Solve P(T > t) = target on t >= 0, then restore the sign.
  const bool upper = prob > 0.5;
  const double target = upper ? 1.0 - prob : prob;

  double lo = 0.0;
  double hi = 1.0;
  while (t_upper_tail(hi, df) > target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("t quantile bracket overflow");
  }

  const double z = normal_quantile(1.0 - target);
  double t = z * (1.0 + (z * z + 1.0) / (4.0 * df));
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double f = t_upper_tail(t, df) - target;
    if (f == 0.0) break;
    // Tail is decreasing in t.
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = -t_density(t, df);
    double next = t - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - t);
    t = next;
    if (step <= 4.0 * kEps * std::fabs(t) || hi - lo <= 4.0 * kEps * hi) break;
  }
  return upper ? t : -t;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw UsageError("normal quantile requires 0 < prob < 1 (got " + std::to_string(prob) + ")");
  }
  const double q = prob - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace metareg
