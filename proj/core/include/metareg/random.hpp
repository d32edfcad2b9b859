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

#ifndef METAREG_RANDOM_HPP_
#define METAREG_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <string_view>

namespace metareg {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

// xoshiro256** seeded from SplitMix64(master_seed ^ mix(stream_id)).
//
// The stream state is a pure function of the SeedSpec, so replicate r draws
// the same variates whichever thread runs it and in whatever order.
class Rng {
 public:
  explicit Rng(SeedSpec seed);

  std::uint64_t next_u64() noexcept;

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept;

 private:
  std::array<std::uint64_t, 4> state_;
};

// Stafford variant 13 finalizer; used for hashing stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Standard normal by inversion of one uniform (AS241).
double normal(Rng& rng) noexcept;

// Exact binomial draw.
//   n * min(p, 1 - p) < 10: sequential inversion.
//   otherwise:              BTRS transformed rejection (Hormann 1993).
// p > 0.5 is handled by reflection n - X(n, 1 - p).
std::int64_t binomial(Rng& rng, std::int64_t n, double p);

// Accepts decimal or 0x-prefixed hexadecimal. Throws UsageError.
std::uint64_t parse_seed(std::string_view text);

}  // namespace metareg

#endif  // METAREG_RANDOM_HPP_
