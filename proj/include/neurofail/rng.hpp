// Copyright 2026 The neurofail Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace neurofail {

/// SplitMix64 finalizer. Used to derive independent streams from a master
/// seed and a tuple of identifiers (trial index, layer, neuron, ...).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
  return mix64(seed ^ mix64(a + 0x632be59bd9b4e019ULL));
}

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    Rest... rest) noexcept {
  return derive_seed(derive_seed(seed, a), static_cast<std::uint64_t>(rest)...);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seeded generator with portable sampling helpers. std::mt19937_64 output is
/// fixed by the standard, unlike the std:: distributions, so every sampler
/// here is written against raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return unit_from_bits(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double exponential(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace neurofail
