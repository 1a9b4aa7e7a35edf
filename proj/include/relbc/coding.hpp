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

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "relbc/rng.hpp"

namespace relbc {

/// Block-parity code: the secret bit is the XOR of N block values, each block
/// transmitted as k identical bits. N must be even.
struct BlockCode {
  std::size_t n_blocks = 2;  // N
  std::size_t block_len = 1;  // k

  BlockCode() = default;
  BlockCode(std::size_t n, std::size_t k) : n_blocks(n), block_len(k) {
    if (n_blocks == 0 || n_blocks % 2 != 0)
      throw std::invalid_argument("BlockCode: N must be a positive even integer");
    if (block_len == 0) throw std::invalid_argument("BlockCode: k must be >= 1");
  }

  std::size_t n_bits() const { return n_blocks * block_len; }
};

/// Encoded secret bit: N block values plus the expanded N*k bit string.
struct Codeword {
  std::vector<std::uint8_t> block_values;  // length N
  std::vector<std::uint8_t> bits;          // length N*k, block-major

  int parity() const {
    int p = 0;
    for (std::uint8_t v : block_values) p ^= v;
    return p;
  }
};

/// Draw block values uniformly subject to parity == bit, then expand each
/// block to k identical bits. Deterministic for a given seed.
inline Codeword encode(int bit, const BlockCode& code, std::uint64_t seed) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("encode: bit must be 0 or 1");
  Rng rng(seed);
  Codeword cw;
  cw.block_values.resize(code.n_blocks);
  int acc = 0;
  for (std::size_t j = 0; j + 1 < code.n_blocks; ++j) {
    cw.block_values[j] = static_cast<std::uint8_t>(rng.coin());
    acc ^= cw.block_values[j];
  }
  cw.block_values[code.n_blocks - 1] = static_cast<std::uint8_t>(acc ^ bit);
  cw.bits.resize(code.n_bits());
  for (std::size_t j = 0; j < code.n_blocks; ++j)
    for (std::size_t i = 0; i < code.block_len; ++i)
      cw.bits[j * code.block_len + i] = cw.block_values[j];
  return cw;
}

struct MajorityDecode {
  std::vector<std::uint8_t> block_values;
  std::vector<std::uint8_t> tie_flags;  // 1 where an exact k/2 tie was forced to 0
  int parity = 0;
};

/// Majority vote per block; exact ties (even k) decode to 0 and are flagged.
inline MajorityDecode decode_majority(const std::vector<std::uint8_t>& noisy_bits,
                                      const BlockCode& code) {
  if (noisy_bits.size() != code.n_bits())
    throw std::invalid_argument("decode_majority: bit count does not match the code");
  MajorityDecode out;
  out.block_values.resize(code.n_blocks);
  out.tie_flags.assign(code.n_blocks, 0);
  for (std::size_t j = 0; j < code.n_blocks; ++j) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < code.block_len; ++i) ones += noisy_bits[j * code.block_len + i];
    if (2 * ones == code.block_len) {
      out.block_values[j] = 0;
      out.tie_flags[j] = 1;
    } else {
      out.block_values[j] = 2 * ones > code.block_len ? 1 : 0;
    }
    out.parity ^= out.block_values[j];
  }
  return out;
}

namespace detail {

/// Count of binary strings of length n whose Hamming weight is a multiple of
/// k, by the exact binomial sum. Valid for n <= 120.
inline unsigned __int128 count_weight_multiples_u128(std::size_t n, std::size_t k) {
  if (n > 120) throw std::overflow_error("parity-string count: N*k exceeds the 128-bit guard");
  // One Pascal row of C(n, m); entries fit 128 bits for n <= 120.
  std::vector<unsigned __int128> row(n + 1, 0);
  row[0] = 1;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t m = i; m > 0; --m) row[m] += row[m - 1];
  unsigned __int128 total = 0;
  for (std::size_t m = 0; m * k <= n; ++m) total += row[m * k];
  return total;
}

inline double u128_to_double(unsigned __int128 v) {
  return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(v >> 64)), 64) +
         static_cast<double>(static_cast<std::uint64_t>(v));
}

}  // namespace detail

/// Three evaluations of the parity-string count: the halved binomial sum
/// (exact integer, available for N*k <= 62), the closed trigonometric form,
/// and the 2^{Nk}/(2k) approximation.
struct ParityStringCount {
  std::optional<std::uint64_t> exact;  // empty above the N*k = 62 overflow guard
  double trig_form = 0.0;
  double approx = 0.0;
};

inline ParityStringCount count_parity_strings(std::size_t n_blocks, std::size_t block_len) {
  if (n_blocks == 0 || block_len == 0)
    throw std::invalid_argument("count_parity_strings: N and k must be positive");
  const std::size_t n = n_blocks * block_len;
  ParityStringCount out;
  if (n <= 62) {
    unsigned __int128 total = detail::count_weight_multiples_u128(n, block_len);
    out.exact = static_cast<std::uint64_t>(total / 2);
  }
  // (2^{Nk} / 2k) * sum_{l=1..k} cos^{Nk}(l pi / k) * cos(l N pi)
  double sum = 0.0;
  for (std::size_t l = 1; l <= block_len; ++l) {
    double c = std::cos(static_cast<double>(l) * M_PI / static_cast<double>(block_len));
    double sign = (l * n_blocks) % 2 == 0 ? 1.0 : -1.0;  // cos(l N pi)
    sum += std::pow(c, static_cast<double>(n)) * sign;
  }
  out.trig_form = std::ldexp(1.0, static_cast<int>(n)) / (2.0 * static_cast<double>(block_len)) * sum;
  out.approx = std::ldexp(1.0, static_cast<int>(n)) / (2.0 * static_cast<double>(block_len));
  return out;
}

/// Shannon information of the block-string set: I = log2(exact count), plus
/// the fill factor eta = I / (N*k). Uses the 128-bit exact count internally
/// so N*k up to 120 is supported.
struct ShannonInfo {
  double bits = 0.0;  // I
  double eta = 0.0;   // I / (N k)
};

inline ShannonInfo shannon_info(std::size_t n_blocks, std::size_t block_len) {
  const std::size_t n = n_blocks * block_len;
  unsigned __int128 total = detail::count_weight_multiples_u128(n, block_len);
  double count = detail::u128_to_double(total / 2);
  ShannonInfo out;
  out.bits = std::log2(count);
  out.eta = out.bits / static_cast<double>(n);
  return out;
}

/// Upper bound on B's parity-guess success before full access:
/// min(1, 1/2 + 2^{-(eta/2) N k}). Clamped because it is a probability.
inline double early_guess_bound(std::size_t n_blocks, std::size_t block_len) {
  ShannonInfo info = shannon_info(n_blocks, block_len);
  double v = 0.5 + std::exp2(-0.5 * info.eta * static_cast<double>(n_blocks * block_len));
  return std::min(1.0, v);
}

/// Binomial coefficient as a double (exact for k <= 56, relative error
/// ~1e-16 beyond). Used only inside floating-point tail sums.
inline double binomial_coefficient(std::size_t n, std::size_t m) {
  if (m > n) return 0.0;
  if (m > n - m) m = n - m;
  double r = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

/// Probability of wrong majority identification of one k-bit block under
/// independent per-bit error p: the exact binomial tail (ties count as
/// errors; odd k sums from ceil(k/2)) and the saddle-point asymptotic
/// sqrt(2/(pi k)) [2 sqrt(p(1-p))]^k. The asymptotic tracks the exact value
/// only for even k.
struct BlockError {
  double exact = 0.0;
  double asymptotic = 0.0;
};

inline BlockError block_error(double p, std::size_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("block_error: p must be in [0,1]");
  if (k == 0) throw std::invalid_argument("block_error: k must be >= 1");
  BlockError out;
  const std::size_t i0 = (k + 1) / 2;  // k/2 for even k, ceil(k/2) for odd k
  double acc = 0.0;
  for (std::size_t i = i0; i <= k; ++i)
    acc += binomial_coefficient(k, i) * std::pow(p, static_cast<double>(i)) *
           std::pow(1.0 - p, static_cast<double>(k - i));
  out.exact = acc;
  out.asymptotic = std::sqrt(2.0 / (M_PI * static_cast<double>(k))) *
                   std::pow(2.0 * std::sqrt(p * (1.0 - p)), static_cast<double>(k));
  return out;
}

/// Probability that an odd number of blocks is wrongly identified: the closed
/// form (1/2)[1 - (1-2p)^N] and the direct odd-term binomial sum. The two are
/// algebraically identical.
struct ParityError {
  double closed_form = 0.0;
  double direct_sum = 0.0;
};

inline ParityError parity_error(double p_block, std::size_t n_blocks) {
  if (!(p_block >= 0.0 && p_block <= 1.0))
    throw std::invalid_argument("parity_error: p_block must be in [0,1]");
  if (n_blocks == 0 || n_blocks % 2 != 0)
    throw std::invalid_argument("parity_error: N must be a positive even integer");
  ParityError out;
  out.closed_form = 0.5 * (1.0 - std::pow(1.0 - 2.0 * p_block, static_cast<double>(n_blocks)));
  double acc = 0.0;
  for (std::size_t i = 1; i <= n_blocks; i += 2)
    acc += binomial_coefficient(n_blocks, i) * std::pow(p_block, static_cast<double>(i)) *
           std::pow(1.0 - p_block, static_cast<double>(n_blocks - i));
  out.direct_sum = acc;
  return out;
}

/// Probability that delaying all k states of one block escapes detection:
/// every delayed state must avoid the perp outcome, so (1 - p_perp)^k.
inline double cheat_probability(double p_perp, std::size_t k) {
  if (!(p_perp >= 0.0 && p_perp <= 1.0))
    throw std::invalid_argument("cheat_probability: p_perp must be in [0,1]");
  return std::pow(1.0 - p_perp, static_cast<double>(k));
}

}  // namespace relbc
