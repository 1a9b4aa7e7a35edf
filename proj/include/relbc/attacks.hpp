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
#include <functional>
#include <stdexcept>
#include <vector>

#include "relbc/channel.hpp"
#include "relbc/coding.hpp"
#include "relbc/measure.hpp"
#include "relbc/protocol.hpp"
#include "relbc/rng.hpp"

namespace relbc {

/// A postpones the choice of one block by shifting its k states to later
/// times. Only shifts beyond Dtau count as attacks: smaller ones sit inside
/// the channel's own localization slack and are undetectable by design.
struct DelayAttack {
  double shift = 0.0;
  std::size_t target_block = 0;
};

/// A announces the opposite bit with one block value flipped.
struct ParityFlipAttack {
  std::size_t target_block = 0;
};

/// The honest input delayed by s as a (single-component) mixed state. s must
/// be at least Dtau and a whole multiple of the grid step.
inline MixedInput make_delayed_state(const WavepacketSpec& spec, double d_tau, double shift,
                                     const TauGrid& grid,
                                     PolarizationVector pol = PolarizationVector::e0()) {
  if (!(shift >= d_tau))
    throw std::invalid_argument("make_delayed_state: shift must be at least Dtau");
  Amplitude f = make_double_hump(spec, grid);
  MixedInput input;
  input.components.push_back({1.0, shifted_by_tau(f, shift), pol});
  return input;
}

/// Mass a delayed amplitude leaks into the honest leading half-window
/// [-Dtau, Dtau]. Small for genuine delays; reported, not enforced.
inline double front_window_leakage(const MixedInput& input, double d_tau) {
  double acc = 0.0;
  for (const WeightedState& c : input.components)
    acc += c.weight * window_mass(c.amplitude, Window::interval(-d_tau, d_tau));
  return acc;
}

// ---------------------------------------------------------------------------
// B's early measurement

struct EarlyMeasureOptions {
  bool full_window = false;        // control runs: lift the window restriction
  bool permutation_known = false;  // control runs: B decodes with the true mapping
};

struct EarlyMeasurementStats {
  std::size_t trials = 0;
  double parity_success_rate = 0.0;
  double per_bit_error_rate = 0.0;
  double eq24_bound = 0.0;  // 1/2 + 2^{-(eta/2) N k}
  std::size_t total_bits = 0;
  std::size_t total_noclick = 0;
};

using EarlyTrialHook = std::function<void(std::size_t trial, int committed, int guessed,
                                          std::size_t bit_errors, std::size_t noclick)>;

/// B measures every channel while only the leading half-window [-Dtau, Dtau]
/// is accessible, fills unmeasured bits with fair guesses, and decodes the
/// parity. The permutation is still undisclosed at this stage, so B decodes
/// against channel order; with it unknown, the block structure carries
/// essentially no parity information and B's success stays at the Eq.-24
/// bound. Per-bit errors are counted in channel order (permutation-free).
inline EarlyMeasurementStats run_early_measurement(const ProtocolConfig& config,
                                                   std::size_t trials, std::uint64_t master_seed,
                                                   const EarlyMeasureOptions& opts = {},
                                                   const EarlyTrialHook& on_trial = {}) {
  config.validate();
  const std::size_t n_bits = config.code.n_bits();
  const TauGrid& grid = config.channel.input.grid;
  const PolarizationPOVM povm = optimal_povm(gamma_operator(config.channel));
  const Window window = opts.full_window
                            ? Window::full(grid)
                            : Window::interval(-config.d_tau, config.d_tau);

  OutputEnsemble ens[2] = {
      apply_channel(config.channel, make_input_state(0, config.spec, grid)),
      apply_channel(config.channel, make_input_state(1, config.spec, grid))};
  OutcomeSampler samplers[2] = {OutcomeSampler(ens[0].components, config.channel, povm, window),
                                OutcomeSampler(ens[1].components, config.channel, povm, window)};

  detail::PartySeeds seeds = detail::effective_seeds(config, master_seed);
  EarlyMeasurementStats stats;
  stats.trials = trials;
  stats.eq24_bound = early_guess_bound(config.code.n_blocks, config.code.block_len);
  std::size_t successes = 0, bit_errors = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng a_rng(derive_seed(seeds.a, t));
    std::uint64_t b_trial = derive_seed(seeds.b, t);
    Rng outcome_rng(derive_seed(b_trial, 0));
    Rng guess_rng(derive_seed(b_trial, 1));

    int committed = a_rng.coin();
    Codeword cw = encode(committed, config.code, a_rng.next_u64());
    std::vector<std::uint32_t> perm = config.permutation_enabled
                                          ? a_rng.permutation(n_bits)
                                          : detail::identity_permutation(n_bits);
    std::vector<std::uint8_t> bit_on_channel(n_bits);
    for (std::size_t p = 0; p < n_bits; ++p) bit_on_channel[perm[p]] = cw.bits[p];

    std::vector<Outcome> outcomes(n_bits);
    for (std::size_t c = 0; c < n_bits; ++c)
      outcomes[c] = samplers[bit_on_channel[c]].draw(outcome_rng);
    detail::FilledBits filled = detail::fill_bits(outcomes, guess_rng);

    std::size_t trial_bit_errors = 0;
    for (std::size_t c = 0; c < n_bits; ++c)
      if (filled.bits[c] != bit_on_channel[c]) ++trial_bit_errors;

    std::vector<std::uint8_t> by_position(n_bits);
    for (std::size_t p = 0; p < n_bits; ++p)
      by_position[p] = opts.permutation_known ? filled.bits[perm[p]] : filled.bits[p];
    int guessed = decode_majority(by_position, config.code).parity;

    successes += guessed == committed ? 1 : 0;
    bit_errors += trial_bit_errors;
    stats.total_noclick += filled.n_noclick;
    if (on_trial) on_trial(t, committed, guessed, trial_bit_errors, filled.n_noclick);
  }

  stats.total_bits = trials * n_bits;
  stats.parity_success_rate = trials ? static_cast<double>(successes) / trials : 0.0;
  stats.per_bit_error_rate =
      stats.total_bits ? static_cast<double>(bit_errors) / stats.total_bits : 0.0;
  return stats;
}

// ---------------------------------------------------------------------------
// A's delay attack

struct DelayAttackStats {
  std::size_t trials = 0;
  std::size_t k = 0;
  double p_perp = 0.0;  // per-state perp probability of the delayed output
  double undetected_rate = 0.0;
  double predicted_undetected = 0.0;  // (1 - p_perp)^k
  std::size_t honest_channel_perp = 0;  // control: must stay zero
  double max_mode_overlap = 0.0;        // sup |<eta_k|u_i>|^2 over the run
};

using AttackTrialHook = std::function<void(std::size_t trial, int committed, int announced,
                                           bool detected, std::size_t n_perp,
                                           std::size_t n_noclick)>;

/// A delays the k states of one block to postpone the choice of the bit and
/// announces the flipped value at disclosure. The delayed states miss the
/// honest mode subspace with per-state probability p_perp, so the cheat goes
/// unnoticed only when none of the k delayed states produces a perp outcome.
inline DelayAttackStats run_delay_attack(const ProtocolConfig& config, const DelayAttack& attack,
                                         std::size_t trials, std::uint64_t master_seed,
                                         const AttackTrialHook& on_trial = {}) {
  config.validate();
  if (attack.target_block >= config.code.n_blocks)
    throw std::invalid_argument("run_delay_attack: target block out of range");
  if (!(attack.shift >= config.d_tau))
    throw std::invalid_argument("run_delay_attack: delay must be at least Dtau");
  const std::size_t n_bits = config.code.n_bits();
  const std::size_t k = config.code.block_len;
  const TauGrid& grid = config.channel.input.grid;
  const PolarizationPOVM povm = optimal_povm(gamma_operator(config.channel));
  const Window full = Window::full(grid);

  OutputEnsemble honest_ens[2] = {
      apply_channel(config.channel, make_input_state(0, config.spec, grid)),
      apply_channel(config.channel, make_input_state(1, config.spec, grid))};
  OutcomeSampler honest_samplers[2] = {
      OutcomeSampler(honest_ens[0].components, config.channel, povm, full),
      OutcomeSampler(honest_ens[1].components, config.channel, povm, full)};

  GeneralOutput delayed_out[2];
  std::vector<OutcomeSampler> delayed_samplers;
  for (int b = 0; b < 2; ++b) {
    MixedInput delayed = make_delayed_state(
        config.spec, config.d_tau, attack.shift, grid,
        b == 0 ? PolarizationVector::e0() : PolarizationVector::e1());
    delayed_out[b] = apply_channel_general(config.channel, delayed);
    delayed_samplers.emplace_back(delayed_out[b], config.channel, povm, full);
  }

  DelayAttackStats stats;
  stats.trials = trials;
  stats.k = k;
  stats.p_perp = perp_probability(delayed_out[0], config.channel);
  stats.predicted_undetected = cheat_probability(stats.p_perp, k);
  for (int b = 0; b < 2; ++b) {
    OverlapBoundReport r = overlap_bound_check(delayed_out[b], config.channel, config.spec.delta);
    stats.max_mode_overlap = std::max(stats.max_mode_overlap, r.max_overlap);
  }

  detail::PartySeeds seeds = detail::effective_seeds(config, master_seed);
  std::size_t undetected = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng a_rng(derive_seed(seeds.a, t));
    std::uint64_t b_trial = derive_seed(seeds.b, t);
    Rng outcome_rng(derive_seed(b_trial, 0));

    // A commits to `committed`, then changes its mind: the delayed block is
    // sent late carrying the flipped value, and the disclosure announces the
    // flipped string consistently.
    int committed = a_rng.coin();
    Codeword cw = encode(committed, config.code, a_rng.next_u64());
    std::vector<std::uint32_t> perm = config.permutation_enabled
                                          ? a_rng.permutation(n_bits)
                                          : detail::identity_permutation(n_bits);

    Announcement ann;
    ann.bit = committed ^ 1;
    ann.block_values = cw.block_values;
    ann.block_values[attack.target_block] ^= 1;
    ann.permutation = perm;
    int late_value = ann.block_values[attack.target_block];

    ProtocolTranscript tr;
    tr.trial_index = t;
    tr.b_guess_seed = derive_seed(b_trial, 1);
    tr.committed_bit = committed;
    tr.codeword = cw;
    tr.announcement = ann;
    auto window = commitment_window(config);
    tr.timing = {window.first, window.second, window.second};

    std::vector<std::uint32_t> position_of(n_bits);  // inverse permutation
    for (std::size_t p = 0; p < n_bits; ++p) position_of[perm[p]] = static_cast<std::uint32_t>(p);

    tr.outcomes.resize(n_bits);
    for (std::size_t c = 0; c < n_bits; ++c) {
      std::size_t p = position_of[c];
      if (p / k == attack.target_block)
        tr.outcomes[c] = delayed_samplers[late_value].draw(outcome_rng);
      else
        tr.outcomes[c] = honest_samplers[cw.bits[p]].draw(outcome_rng);
    }

    VerificationReport report = verify(tr, ann, config);
    bool detected = !report.accepted;
    undetected += detected ? 0 : 1;
    // Honest channels must never land in the perp channel; track them apart
    // from the delayed block's perp clicks.
    for (std::size_t c = 0; c < n_bits; ++c) {
      if (tr.outcomes[c].kind != Outcome::Kind::Perp) continue;
      if (position_of[c] / k != attack.target_block) ++stats.honest_channel_perp;
    }
    if (on_trial) on_trial(t, committed, ann.bit, detected, report.n_perp, report.n_noclick);
  }

  stats.undetected_rate = trials ? static_cast<double>(undetected) / trials : 0.0;
  return stats;
}

// ---------------------------------------------------------------------------
// A's parity flip at disclosure

struct ParityFlipStats {
  std::size_t trials = 0;
  double detection_rate = 0.0;
  double predicted_min_detection = 0.0;  // 1 - block_error(P_e, k)
};

/// A sends honestly but announces the opposite bit with one block value
/// flipped. B's measured majorities contradict the flipped block unless the
/// channel noise flips the whole block, so detection happens with
/// probability at least 1 - block_error(P_e, k).
inline ParityFlipStats run_parity_flip(const ProtocolConfig& config,
                                       const ParityFlipAttack& attack, std::size_t trials,
                                       std::uint64_t master_seed,
                                       const AttackTrialHook& on_trial = {}) {
  config.validate();
  if (attack.target_block >= config.code.n_blocks)
    throw std::invalid_argument("run_parity_flip: target block out of range");
  const std::size_t n_bits = config.code.n_bits();
  const TauGrid& grid = config.channel.input.grid;
  const PolarizationPOVM povm = optimal_povm(gamma_operator(config.channel));
  const Window full = Window::full(grid);

  OutputEnsemble ens[2] = {
      apply_channel(config.channel, make_input_state(0, config.spec, grid)),
      apply_channel(config.channel, make_input_state(1, config.spec, grid))};
  OutcomeSampler samplers[2] = {OutcomeSampler(ens[0].components, config.channel, povm, full),
                                OutcomeSampler(ens[1].components, config.channel, povm, full)};

  detail::PartySeeds seeds = detail::effective_seeds(config, master_seed);
  ParityFlipStats stats;
  stats.trials = trials;
  stats.predicted_min_detection =
      1.0 - block_error(full_access_error(config.channel), config.code.block_len).exact;
  std::size_t detected_count = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng a_rng(derive_seed(seeds.a, t));
    std::uint64_t b_trial = derive_seed(seeds.b, t);
    Rng outcome_rng(derive_seed(b_trial, 0));

    ProtocolTranscript tr;
    tr.trial_index = t;
    tr.b_guess_seed = derive_seed(b_trial, 1);
    tr.committed_bit = a_rng.coin();
    tr.codeword = encode(tr.committed_bit, config.code, a_rng.next_u64());
    std::vector<std::uint32_t> perm = config.permutation_enabled
                                          ? a_rng.permutation(n_bits)
                                          : detail::identity_permutation(n_bits);
    Announcement ann;
    ann.bit = tr.committed_bit ^ 1;
    ann.block_values = tr.codeword.block_values;
    ann.block_values[attack.target_block] ^= 1;
    ann.permutation = perm;
    tr.announcement = ann;
    auto window = commitment_window(config);
    tr.timing = {window.first, window.second, window.second};

    std::vector<std::uint8_t> bit_on_channel(n_bits);
    for (std::size_t p = 0; p < n_bits; ++p) bit_on_channel[perm[p]] = tr.codeword.bits[p];
    tr.outcomes.resize(n_bits);
    for (std::size_t c = 0; c < n_bits; ++c)
      tr.outcomes[c] = samplers[bit_on_channel[c]].draw(outcome_rng);

    VerificationReport report = verify(tr, ann, config);
    bool detected = !report.accepted;
    detected_count += detected ? 1 : 0;
    if (on_trial) on_trial(t, tr.committed_bit, ann.bit, detected, report.n_perp, report.n_noclick);
  }

  stats.detection_rate = trials ? static_cast<double>(detected_count) / trials : 0.0;
  return stats;
}

}  // namespace relbc
