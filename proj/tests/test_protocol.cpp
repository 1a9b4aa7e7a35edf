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

#include <catch2/catch_amalgamated.hpp>

#include "relbc/protocol.hpp"
#include "oracles.hpp"

using namespace relbc;

namespace {

ProtocolConfig make_config(const std::string& channel, std::size_t n, std::size_t k,
                           double theta = 0.0, double lambda = 1.0) {
  ProtocolConfig pc;
  pc.code = BlockCode(n, k);
  TauGrid grid = default_grid(pc.spec);
  if (channel == "ideal")
    pc.channel = make_ideal_channel(pc.spec, grid);
  else if (channel == "rotate")
    pc.channel = make_rotate_channel(pc.spec, grid, theta, lambda);
  else if (channel == "jitter")
    pc.channel = make_jitter_channel(pc.spec, grid, {0.0, 2.5}, {0.5, 0.3});
  else if (channel == "collapse")
    pc.channel = make_collapse_channel(pc.spec, grid, lambda);
  else
    pc.channel = make_absorbing_channel(pc.spec, grid);
  pc.d_tau = pc.channel.d_tau;
  return pc;
}

ProtocolTranscript one_transcript(const ProtocolConfig& config, std::uint64_t seed) {
  ProtocolTranscript out;
  run_honest(config, 1, seed,
             [&](std::size_t, const ProtocolTranscript& tr, const VerificationReport&) {
               out = tr;
             });
  return out;
}

/// Analytic acceptance oracle: per-block consistency from the 2x2 confusion
/// structure of B's bit estimates, assuming iid uniform block values.
double analytic_acceptance(const ProtocolConfig& config) {
  // P(estimate = 1 | sent b): clicks identify the bit through the POVM,
  // no-clicks are fair guesses.
  const ChannelModel& m = config.channel;
  PolarizationPOVM povm = optimal_povm(gamma_operator(m));
  double q1[2];
  for (int b = 0; b < 2; ++b) {
    double lam = 0.0, acc = 0.0;
    for (const ChannelMode& mode : m.modes) {
      lam += mode.weight;
      acc += mode.weight * povm.e1.expectation(mode.pol_out[b]);
    }
    q1[b] = acc + 0.5 * (1.0 - lam);
  }
  std::size_t k = config.code.block_len;
  // Majority with ties to zero: P(decode == sent value).
  double consistent[2];
  {
    // ones ~ Binomial(k, q1[b]); decode 1 iff ones > k/2.
    for (int b = 0; b < 2; ++b) {
      double p_decode1 = 0.0;
      for (std::size_t i = k / 2 + 1; i <= k; ++i)
        p_decode1 += binomial_coefficient(k, i) * std::pow(q1[b], double(i)) *
                     std::pow(1.0 - q1[b], double(k - i));
      consistent[b] = b == 1 ? p_decode1 : 1.0 - p_decode1;
    }
  }
  double avg = 0.5 * (consistent[0] + consistent[1]);
  return std::pow(avg, static_cast<double>(config.code.n_blocks));
}

}  // namespace

TEST_CASE("commitment window", "[protocol]") {
  ProtocolConfig pc = make_config("ideal", 4, 4);
  auto [lo, hi] = commitment_window(pc);
  CHECK(lo == -5.0);
  CHECK(hi == 25.0);
  CHECK(hi - lo == pc.spec.tau0 + 2.0 * pc.spec.delta_tau);
}

TEST_CASE("honest runs on the identity channel", "[protocol]") {
  ProtocolConfig pc = make_config("ideal", 4, 4);
  HonestRunStats stats = run_honest(pc, 300, 7);
  CHECK(stats.acceptance_rate == 1.0);
  CHECK(stats.recovery_rate == 1.0);
  CHECK(stats.total_perp == 0);
  CHECK(stats.total_noclick == 0);
  CHECK(stats.analytic_parity_error == 0.0);
}

TEST_CASE("verify decisions", "[protocol]") {
  ProtocolConfig pc = make_config("ideal", 4, 4);
  ProtocolTranscript tr = one_transcript(pc, 11);

  SECTION("honest transcript is accepted") {
    VerificationReport r = verify(tr, tr.announcement, pc);
    CHECK(r.accepted);
    CHECK(r.recovered_bit == tr.committed_bit);
    CHECK(r.reasons.empty());
  }
  SECTION("a perp outcome aborts") {
    ProtocolTranscript bad = tr;
    bad.outcomes[3] = Outcome{Outcome::Kind::Perp, 0, 0, 1.0};
    VerificationReport r = verify(bad, bad.announcement, pc);
    CHECK_FALSE(r.accepted);
    REQUIRE_FALSE(r.reasons.empty());
    CHECK(r.reasons.front() == FailureReason::perp_outcome);
    CHECK(r.n_perp == 1);
  }
  SECTION("a late time tag aborts") {
    ProtocolTranscript bad = tr;
    for (auto& o : bad.outcomes)
      if (o.kind == Outcome::Kind::ModePol) {
        o.time_tag = pc.spec.tau0 / 2.0;  // between the two half-windows
        break;
      }
    VerificationReport r = verify(bad, bad.announcement, pc);
    CHECK_FALSE(r.accepted);
    CHECK(r.n_timing_violations == 1);
  }
  SECTION("a flipped block value aborts with a block mismatch") {
    Announcement ann = tr.announcement;
    ann.bit ^= 1;
    ann.block_values[1] ^= 1;
    VerificationReport r = verify(tr, ann, pc);
    CHECK_FALSE(r.accepted);
    CHECK(r.n_block_mismatches == 1);
    bool has_block = false;
    for (auto reason : r.reasons) has_block |= reason == FailureReason::block_mismatch;
    CHECK(has_block);
  }
  SECTION("inconsistent announced parity aborts") {
    Announcement ann = tr.announcement;
    ann.bit ^= 1;  // blocks untouched: parity no longer matches
    VerificationReport r = verify(tr, ann, pc);
    CHECK_FALSE(r.accepted);
    CHECK(r.parity_mismatch);
  }
  SECTION("malformed announcements are structural errors, not aborts") {
    Announcement ann = tr.announcement;
    ann.block_values.pop_back();
    CHECK_THROWS_AS(verify(tr, ann, pc), std::invalid_argument);
    ann = tr.announcement;
    ann.permutation[0] = ann.permutation[1];
    CHECK_THROWS_AS(verify(tr, ann, pc), std::invalid_argument);
    ann = tr.announcement;
    ann.bit = 2;
    CHECK_THROWS_AS(verify(tr, ann, pc), std::invalid_argument);
  }
}

TEST_CASE("transcript determinism", "[protocol]") {
  ProtocolConfig pc = make_config("rotate", 4, 4, M_PI / 8.0, 0.8);
  std::vector<std::string> first, second, different;
  auto collect = [](std::vector<std::string>& into) {
    return [&into](std::size_t, const ProtocolTranscript& tr, const VerificationReport&) {
      into.push_back(tr.to_string());
    };
  };
  run_honest(pc, 25, 123, collect(first));
  run_honest(pc, 25, 123, collect(second));
  run_honest(pc, 25, 124, collect(different));
  CHECK(first == second);
  CHECK(first != different);
}

TEST_CASE("collapse channel destroys the bit", "[protocol]") {
  ProtocolConfig pc = make_config("collapse", 4, 4);
  HonestRunStats stats = run_honest(pc, 20000, 31);
  CHECK(oracles::within_3sigma(stats.recovery_rate, 0.5, stats.trials));
}

TEST_CASE("noisy-channel recovery matches the analytic pipeline", "[protocol]") {
  ProtocolConfig pc = make_config("rotate", 8, 16, M_PI / 8.0, 0.8);
  HonestRunStats stats = run_honest(pc, 3000, 97);
  CHECK(stats.per_bit_error == Catch::Approx(0.1).margin(1e-9));
  double predicted = 1.0 - stats.analytic_parity_error;
  double sigma = std::sqrt(std::max(predicted * (1.0 - predicted), 1e-12) / stats.trials);
  CHECK(stats.recovery_rate >= predicted - 3.0 * sigma);
  CHECK(stats.recovery_rate <= predicted + 3.0 * sigma + 5e-4);  // tie decoding can only help
}

TEST_CASE("soundness across the catalogue", "[protocol]") {
  for (const char* name : {"ideal", "rotate", "jitter", "collapse", "absorbing"}) {
    ProtocolConfig pc = make_config(name, 4, 4, M_PI / 8.0, 0.8);
    HonestRunStats stats = run_honest(pc, 2000, 41);
    double expected = analytic_acceptance(pc);
    double sigma = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / stats.trials);
    INFO(name << " expected=" << expected << " got=" << stats.acceptance_rate);
    CHECK(stats.acceptance_rate >= expected - 3.0 * sigma - 1e-3);
  }
}

TEST_CASE("permutation can be disabled for debugging", "[protocol]") {
  ProtocolConfig pc = make_config("ideal", 4, 4);
  pc.permutation_enabled = false;
  std::size_t checked = 0;
  HonestRunStats stats =
      run_honest(pc, 10, 3, [&](std::size_t, const ProtocolTranscript& tr,
                                 const VerificationReport& r) {
        for (std::size_t p = 0; p < tr.announcement.permutation.size(); ++p)
          CHECK(tr.announcement.permutation[p] == p);
        CHECK(r.accepted);
        ++checked;
      });
  CHECK(checked == 10);
  CHECK(stats.acceptance_rate == 1.0);
}

TEST_CASE("invalid configs are rejected before any trial", "[protocol]") {
  ProtocolConfig pc = make_config("ideal", 4, 4);
  pc.d_tau = 7.0;  // disagrees with the channel
  CHECK_THROWS_AS(run_honest(pc, 1, 1), std::invalid_argument);
  ProtocolConfig bad = make_config("ideal", 4, 4);
  bad.channel.modes[0].profile = shifted_by_tau(bad.channel.input, -3.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
