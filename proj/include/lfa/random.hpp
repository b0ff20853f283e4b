/*
 * Copyright 2026 The LFA Authors.
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

#ifndef LFA_RANDOM_HPP_
#define LFA_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <string_view>

namespace lfa {

// Seedable random stream (xoshiro256** seeded through splitmix64). Every
// draw is computed by this class, never by <random> distributions, so a
// seed yields the same sequence with any standard library.
//
// Single owner. Concurrent tasks take `fork(label)` children; a child
// depends only on the parent seed and the label, not on how many values
// the parent has produced.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  RandomStream fork(std::string_view label) const;
  RandomStream fork(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  bool bernoulli(double p);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t choice(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace lfa

#endif  // LFA_RANDOM_HPP_
