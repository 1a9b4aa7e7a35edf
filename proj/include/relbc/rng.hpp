// Copyright 2026 The relbc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace relbc {

/// SplitMix64 finalizer. Bit-exact on every platform; all randomness in the
/// library flows through this mix so that runs are reproducible from a seed.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation: derive_seed(s, 0), derive_seed(s, 1), ...
/// give independent streams for one master seed. This is the documented
/// derivation used everywhere (A/B party seeds, per-trial seeds).
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::uint64_t counter) {
  return mix64(master + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Deterministic PRNG (SplitMix64 stream). Small state, value-semantic,
/// no hidden globals; trials may run concurrently on derived seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Fair bit, used for B's blind guesses.
  int coin() { return static_cast<int>(next_u64() >> 63); }

  /// Uniform integer in [0, n). Lemire's multiply-shift; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // 128-bit multiply keeps the draw unbiased enough for simulation use
    // (bias < 2^-64 per draw) while staying branch-free and portable.
    unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::uint32_t> permutation(std::size_t n) {
    std::vector<std::uint32_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

 private:
  std::uint64_t state_;
};

}  // namespace relbc
