/*
 * Copyright 2026 The GLS Correction Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GLS_RANDOM_HPP_
#define GLS_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace gls {

// Seedable generator with platform-independent output.
//
// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
// standard. Uniform and normal variates are derived here instead of through
// <random> distributions, whose algorithms are implementation-defined.
//
// Streams are split by purpose: Rng(seed).child("labels") and
// Rng(seed).child("features") yield independent generators whose seeds are
// splitmix64(seed ^ fnv1a64(purpose)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng child(std::string_view purpose) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  // Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace gls

#endif  // GLS_RANDOM_HPP_
