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

#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relbc/channel.hpp"
#include "relbc/coding.hpp"
#include "relbc/grid.hpp"
#include "relbc/measure.hpp"
#include "relbc/rng.hpp"
#include "relbc/states.hpp"

namespace relbc {

/// Everything the parties agree on in advance: the code, the wavepacket, the
/// channel (with its Dtau), party seeds, and whether A shuffles the states
/// across channels. The channel length is zero; all timing lives in tau.
struct ProtocolConfig {
  BlockCode code;
  WavepacketSpec spec;
  ChannelModel channel;
  double d_tau = 8.0;  // must agree with channel.d_tau
  std::uint64_t seed_a = 1;
  std::uint64_t seed_b = 2;
  bool permutation_enabled = true;

  void validate() const {
    spec.validate();
    if (d_tau != channel.d_tau)
      throw std::invalid_argument("ProtocolConfig: d_tau disagrees with the channel");
    ValidationReport report = validate_channel(channel, spec);
    if (!report.all_pass())
      throw std::invalid_argument("ProtocolConfig: channel fails validation:\n" +
                                  report.to_string());
  }
};

/// Interval during which B may demand disclosure; while it lasts, B's
/// information on the bit is exponentially close to a fair guess.
inline std::pair<double, double> commitment_window(const ProtocolConfig& config) {
  return {-config.spec.delta_tau, config.spec.delta_tau + config.spec.tau0};
}

/// A's disclosure message: the bit, the block values, and the permutation
/// that scattered string positions over channels.
struct Announcement {
  int bit = 0;
  std::vector<std::uint8_t> block_values;
  std::vector<std::uint32_t> permutation;  // string position -> channel index
};

struct TimingLog {
  double window_lo = 0.0;
  double window_hi = 0.0;
  double disclosure_tau = 0.0;  // default: the window end
};

/// Full timed record of one run: what A committed and sent, what B measured
/// per channel, and what A announced.
struct ProtocolTranscript {
  std::size_t trial_index = 0;
  int committed_bit = 0;
  Codeword codeword;
  std::vector<Outcome> outcomes;  // indexed by channel
  Announcement announcement;
  TimingLog timing;
  std::uint64_t b_guess_seed = 0;  // stream B uses to fill unmeasured bits

  std::string to_string() const {
    std::ostringstream os;
    os << "trial=" << trial_index << " bit=" << committed_bit << " blocks=";
    for (std::uint8_t v : codeword.block_values) os << int(v);
    os << " perm=";
    for (std::uint32_t p : announcement.permutation) os << p << ",";
    os << " announced=" << announcement.bit << "/";
    for (std::uint8_t v : announcement.block_values) os << int(v);
    char buf[96];
    std::snprintf(buf, sizeof(buf), " window=[%.9g,%.9g] disclose=%.9g",
                  timing.window_lo, timing.window_hi, timing.disclosure_tau);
    os << buf << " outcomes=";
    for (const Outcome& o : outcomes) {
      switch (o.kind) {
        case Outcome::Kind::ModePol:
          std::snprintf(buf, sizeof(buf), "M%zu:%d@%.9g;", o.mode, o.pol,
                        o.time_tag.value_or(0.0));
          break;
        case Outcome::Kind::Perp:
          std::snprintf(buf, sizeof(buf), "P@%.9g;", o.time_tag.value_or(0.0));
          break;
        case Outcome::Kind::NoClick:
          std::snprintf(buf, sizeof(buf), "N;");
          break;
      }
      os << buf;
    }
    return os.str();
  }
};

enum class FailureReason { perp_outcome, timing_violation, block_mismatch, parity_mismatch };

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::perp_outcome: return "perp_outcome";
    case FailureReason::timing_violation: return "timing_violation";
    case FailureReason::block_mismatch: return "block_mismatch";
    case FailureReason::parity_mismatch: return "parity_mismatch";
  }
  return "?";
}

/// B's accept/abort decision with diagnostics. All checks are evaluated even
/// after the first failure so the report stays complete.
struct VerificationReport {
  bool accepted = false;
  int recovered_bit = 0;
  std::vector<FailureReason> reasons;
  std::size_t n_perp = 0;
  std::size_t n_timing_violations = 0;
  std::size_t n_block_mismatches = 0;
  std::size_t n_noclick = 0;
  bool parity_mismatch = false;
};

namespace detail {

/// B's per-channel bit estimates: the POVM result where a mode click
/// happened, a fair guess elsewhere.
struct FilledBits {
  std::vector<std::uint8_t> bits;  // indexed by channel
  std::size_t n_noclick = 0;
  std::size_t n_perp = 0;
};

inline FilledBits fill_bits(const std::vector<Outcome>& outcomes, Rng& guess_rng) {
  FilledBits f;
  f.bits.resize(outcomes.size());
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const Outcome& o = outcomes[c];
    if (o.kind == Outcome::Kind::ModePol) {
      f.bits[c] = static_cast<std::uint8_t>(o.pol);
    } else {
      f.bits[c] = static_cast<std::uint8_t>(guess_rng.coin());
      if (o.kind == Outcome::Kind::NoClick)
        ++f.n_noclick;
      else
        ++f.n_perp;
    }
  }
  return f;
}

inline void check_announcement(const Announcement& ann, const BlockCode& code) {
  if (ann.bit != 0 && ann.bit != 1)
    throw std::invalid_argument("announcement: bit must be 0 or 1");
  if (ann.block_values.size() != code.n_blocks)
    throw std::invalid_argument("announcement: wrong number of block values");
  for (std::uint8_t v : ann.block_values)
    if (v > 1) throw std::invalid_argument("announcement: block values must be bits");
  if (ann.permutation.size() != code.n_bits())
    throw std::invalid_argument("announcement: permutation has the wrong length");
  std::vector<bool> seen(ann.permutation.size(), false);
  for (std::uint32_t p : ann.permutation) {
    if (p >= ann.permutation.size() || seen[p])
      throw std::invalid_argument("announcement: not a permutation");
    seen[p] = true;
  }
}

inline std::vector<std::uint32_t> identity_permutation(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

}  // namespace detail

/// Step-5 verification. Checks, in order: (a) no perp outcomes, (b) every
/// detection time inside one of the two Dtau half-windows, (c) per-block
/// majority of B's measured polarizations consistent with the announced
/// block values, (d) parity of the announced blocks equals the announced
/// bit. Accepted iff all pass. Malformed announcements throw; aborts do not.
inline VerificationReport verify(const ProtocolTranscript& transcript, const Announcement& ann,
                                 const ProtocolConfig& config) {
  detail::check_announcement(ann, config.code);
  if (transcript.outcomes.size() != config.code.n_bits())
    throw std::invalid_argument("transcript: outcome count does not match the code");

  VerificationReport report;
  const double dt = config.channel.input.grid.dt();
  const double d_tau = config.d_tau;
  const double tau0 = config.spec.tau0;

  for (const Outcome& o : transcript.outcomes) {
    if (o.kind == Outcome::Kind::Perp) ++report.n_perp;
    if (o.kind == Outcome::Kind::NoClick) ++report.n_noclick;
    if (o.kind == Outcome::Kind::ModePol && o.time_tag.has_value()) {
      double t = *o.time_tag;
      bool front = t >= -d_tau - dt && t <= d_tau + dt;
      bool back = t >= tau0 - d_tau - dt && t <= tau0 + d_tau + dt;
      if (!front && !back) ++report.n_timing_violations;
    }
  }
  if (report.n_perp > 0) report.reasons.push_back(FailureReason::perp_outcome);
  if (report.n_timing_violations > 0) report.reasons.push_back(FailureReason::timing_violation);

  Rng guess_rng(transcript.b_guess_seed);
  detail::FilledBits filled = detail::fill_bits(transcript.outcomes, guess_rng);
  std::vector<std::uint8_t> by_position(filled.bits.size());
  for (std::size_t p = 0; p < ann.permutation.size(); ++p)
    by_position[p] = filled.bits[ann.permutation[p]];
  MajorityDecode decoded = decode_majority(by_position, config.code);
  report.recovered_bit = decoded.parity;
  for (std::size_t j = 0; j < config.code.n_blocks; ++j)
    if (decoded.block_values[j] != ann.block_values[j]) ++report.n_block_mismatches;
  if (report.n_block_mismatches > 0) report.reasons.push_back(FailureReason::block_mismatch);

  int announced_parity = 0;
  for (std::uint8_t v : ann.block_values) announced_parity ^= v;
  report.parity_mismatch = announced_parity != ann.bit;
  if (report.parity_mismatch) report.reasons.push_back(FailureReason::parity_mismatch);

  report.accepted = report.reasons.empty();
  return report;
}

/// Aggregate statistics over honest runs, with the analytic predictions the
/// empirical rates are compared against.
struct HonestRunStats {
  std::size_t trials = 0;
  double acceptance_rate = 0.0;
  double recovery_rate = 0.0;
  double empirical_parity_error = 0.0;
  double analytic_parity_error = 0.0;  // Eq.-28 pipeline from the per-bit error
  double analytic_block_error = 0.0;
  double per_bit_error = 0.0;  // full-access discrimination error of the channel
  std::size_t total_perp = 0;
  std::size_t total_noclick = 0;
};

using TrialHook =
    std::function<void(std::size_t, const ProtocolTranscript&, const VerificationReport&)>;

namespace detail {

struct PartySeeds {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

inline PartySeeds effective_seeds(const ProtocolConfig& config, std::uint64_t master) {
  return {derive_seed(master ^ config.seed_a, 1), derive_seed(master ^ config.seed_b, 2)};
}

}  // namespace detail

/// Honest protocol runs. Per trial: A draws a bit, encodes it, scatters the
/// N*k states over the channels (permutation recorded and revealed at
/// disclosure), B measures every channel with full access and the optimal
/// POVM, A discloses and B verifies. Deterministic for a given (config, seed).
inline HonestRunStats run_honest(const ProtocolConfig& config, std::size_t trials,
                                 std::uint64_t master_seed, const TrialHook& on_trial = {}) {
  config.validate();
  const std::size_t n_bits = config.code.n_bits();
  const TauGrid& grid = config.channel.input.grid;
  const PolarizationPOVM povm = optimal_povm(gamma_operator(config.channel));
  const Window full = Window::full(grid);

  // The two honest ensembles are trial-independent; build the samplers once.
  OutputEnsemble ens[2] = {
      apply_channel(config.channel, make_input_state(0, config.spec, grid)),
      apply_channel(config.channel, make_input_state(1, config.spec, grid))};
  OutcomeSampler samplers[2] = {OutcomeSampler(ens[0].components, config.channel, povm, full),
                                OutcomeSampler(ens[1].components, config.channel, povm, full)};

  detail::PartySeeds seeds = detail::effective_seeds(config, master_seed);
  auto window = commitment_window(config);

  HonestRunStats stats;
  stats.trials = trials;
  std::size_t accepted = 0, recovered = 0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng a_rng(derive_seed(seeds.a, t));
    std::uint64_t b_trial = derive_seed(seeds.b, t);
    Rng outcome_rng(derive_seed(b_trial, 0));

    ProtocolTranscript tr;
    tr.trial_index = t;
    tr.b_guess_seed = derive_seed(b_trial, 1);
    tr.committed_bit = a_rng.coin();
    tr.codeword = encode(tr.committed_bit, config.code, a_rng.next_u64());
    tr.announcement.permutation = config.permutation_enabled
                                      ? a_rng.permutation(n_bits)
                                      : detail::identity_permutation(n_bits);
    tr.announcement.bit = tr.committed_bit;
    tr.announcement.block_values = tr.codeword.block_values;
    tr.timing = {window.first, window.second, window.second};

    // Channel c carries the bit at the string position mapped onto it.
    std::vector<std::uint8_t> bit_on_channel(n_bits);
    for (std::size_t p = 0; p < n_bits; ++p)
      bit_on_channel[tr.announcement.permutation[p]] = tr.codeword.bits[p];
    tr.outcomes.resize(n_bits);
    for (std::size_t c = 0; c < n_bits; ++c)
      tr.outcomes[c] = samplers[bit_on_channel[c]].draw(outcome_rng);

    VerificationReport report = verify(tr, tr.announcement, config);
    accepted += report.accepted ? 1 : 0;
    recovered += report.recovered_bit == tr.committed_bit ? 1 : 0;
    stats.total_perp += report.n_perp;
    stats.total_noclick += report.n_noclick;
    if (on_trial) on_trial(t, tr, report);
  }

  stats.acceptance_rate = trials ? static_cast<double>(accepted) / trials : 0.0;
  stats.recovery_rate = trials ? static_cast<double>(recovered) / trials : 0.0;
  stats.empirical_parity_error = 1.0 - stats.recovery_rate;
  stats.per_bit_error = full_access_error(config.channel);
  stats.analytic_block_error = block_error(stats.per_bit_error, config.code.block_len).exact;
  stats.analytic_parity_error =
      parity_error(stats.analytic_block_error, config.code.n_blocks).closed_form;
  return stats;
}

}  // namespace relbc
