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
#include <random>

#include "gtest/gtest.h"
#include "metareg/errors.hpp"

namespace metareg {
namespace {

TEST(LogitEffectTest, SymmetricCountsGiveZeroLogit) {
  const auto e = logit_effect(5, 10);
  EXPECT_DOUBLE_EQ(e.y, 0.0);
  EXPECT_NEAR(e.v, 2.0 / 5.5, 1e-15);
}

TEST(LogitEffectTest, DirectFormula) {
  // Reference values from 50-digit evaluation of the formula.
  auto e = logit_effect(10, 100);
  EXPECT_NEAR(e.y, -2.1539745935424, 1e-12);
  EXPECT_NEAR(e.v, 0.106287818995001, 1e-14);

  e = logit_effect(0, 10);
  EXPECT_NEAR(e.y, -3.04452243772342, 1e-13);
  EXPECT_NEAR(e.v, 2.0952380952381, 1e-12);
}

TEST(LogitEffectTest, CorrectionIsUnconditional) {
  const auto e = logit_effect(30, 250);
  EXPECT_DOUBLE_EQ(e.y, std::log(30.5 / 220.5));
  EXPECT_DOUBLE_EQ(e.v, 1.0 / 30.5 + 1.0 / 220.5);
}

TEST(LogitEffectTest, Errors) {
  EXPECT_THROW(logit_effect(11, 10), DataError);
  EXPECT_THROW(logit_effect(-1, 10), DataError);
  EXPECT_THROW(logit_effect(0, 0), DataError);
}

TEST(LogitEffectTest, FiniteForAllValidInputs) {
  for (std::int64_t n : {1, 2, 7, 100, 100000}) {
    for (std::int64_t d = 0; d <= n; d += std::max<std::int64_t>(1, n / 17)) {
      const auto e = logit_effect(d, n);
      EXPECT_TRUE(std::isfinite(e.y));
      EXPECT_TRUE(std::isfinite(e.v));
      EXPECT_GT(e.v, 0.0);
    }
  }
}

TEST(LogitEffectTest, VarianceShrinksWithInformation) {
  // Moving d towards n/2 raises min(d + 0.5, n - d + 0.5).
  const std::int64_t n = 200;
  double previous = logit_effect(0, n).v;
  for (std::int64_t d = 1; d <= n / 2; ++d) {
    const double v = logit_effect(d, n).v;
    EXPECT_LT(v, previous);
    previous = v;
  }
}

TEST(ExpitTest, KnownValues) {
  EXPECT_DOUBLE_EQ(expit(0.0), 0.5);
  EXPECT_NEAR(expit(-1.1477), 0.240909438158247, 1e-14);
  const double big = expit(50.0);
  // 1 - expit(50) is below double resolution near 1.
  EXPECT_EQ(big, 1.0);
  EXPECT_GT(expit(-50.0), 0.0);
  EXPECT_NEAR(expit(-50.0), std::exp(-50.0), 1e-35);
  EXPECT_TRUE(std::isfinite(expit(710.0)));
  EXPECT_TRUE(std::isfinite(expit(-710.0)));
  EXPECT_GT(expit(-700.0), 0.0);
}

TEST(ExpitTest, SymmetryAndMonotonicity) {
  double previous = 0.0;
  for (double t = -40.0; t <= 40.0; t += 0.37) {
    EXPECT_NEAR(expit(-t), 1.0 - expit(t), 1e-15);
    // Strictly increasing until the upper tail rounds to 1.
    if (t < 30.0) {
      EXPECT_GT(expit(t), previous);
    } else {
      EXPECT_GE(expit(t), previous);
    }
    previous = expit(t);
  }
}

TEST(ExpitTest, InvertsLogit) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-23.0, 23.0);
  for (int i = 0; i < 10000; ++i) {
    const double p = expit(u(gen));
    if (p <= 1e-10 || p >= 1.0 - 1e-10) continue;
    EXPECT_NEAR(expit(logit(p)), p, 1e-12);
  }
}

}  // namespace
}  // namespace metareg
