/*
 * Copyright 2026 The FastCal Authors.
 *
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

#ifndef FASTCAL_RNG_H_
#define FASTCAL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace fastcal {

// The single random number generator used throughout the library.
//
// It is SplitMix64 (Steele, Lea & Flood 2014):
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Derived outputs:
//   UniformDouble() = (Next() >> 11) * 2^-53, in [0, 1).
//   UniformIndex(n) = Lemire's multiply-shift with rejection: draw x, take
//     m = x * n as a 128-bit product; while low64(m) < (2^64 - n) mod n,
//     redraw; return high64(m). Result is uniform in [0, n).
//   StandardNormal() = sqrt(-2 ln(1 - u1)) * cos(2 pi u2) with u1, u2 two
//     consecutive UniformDouble() draws. The sine branch is discarded so that
//     every normal draw consumes exactly two raw outputs.
//
// Streams are split by DeriveSeed(seed, stream), which mixes both words
// through the SplitMix64 finalizer; distinct streams are statistically
// independent for practical purposes.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t Next();
  double UniformDouble();
  uint64_t UniformIndex(uint64_t n);
  double StandardNormal();

  // Fisher-Yates, walking i from size-1 down to 1 and swapping i with
  // UniformIndex(i + 1).
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(UniformIndex(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  uint64_t state_;
};

// SplitMix64 output function applied to a single word.
uint64_t Mix64(uint64_t x);

uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

}  // namespace fastcal

#endif  // FASTCAL_RNG_H_
