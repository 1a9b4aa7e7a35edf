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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "relbc/channel.hpp"
#include "relbc/grid.hpp"
#include "relbc/rng.hpp"
#include "relbc/states.hpp"

namespace relbc {

// ---------------------------------------------------------------------------
// 2x2 polarization operators

struct Mat2 {
  Complex m00{0, 0}, m01{0, 0}, m10{0, 0}, m11{0, 0};

  static Mat2 identity() { return {{1, 0}, {0, 0}, {0, 0}, {1, 0}}; }

  static Mat2 projector(const PolarizationVector& v) {
    return {v.a * std::conj(v.a), v.a * std::conj(v.b), v.b * std::conj(v.a),
            v.b * std::conj(v.b)};
  }

  /// <v|M|v>, real for Hermitian M.
  double expectation(const PolarizationVector& v) const {
    Complex r = std::conj(v.a) * (m00 * v.a + m01 * v.b) + std::conj(v.b) * (m10 * v.a + m11 * v.b);
    return r.real();
  }
};

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}

/// The 2x2 Hermitian polarization-discrimination operator Gamma.
struct GammaOperator {
  double g00 = 0.0;
  Complex g01{0.0, 0.0};  // g10 = conj(g01)
  double g11 = 0.0;

  Mat2 to_mat() const { return {{g00, 0}, g01, std::conj(g01), {g11, 0}}; }
  bool is_zero(double tol = 1e-14) const {
    return std::abs(g00) <= tol && std::abs(g11) <= tol && std::abs(g01) <= tol;
  }
};

enum class GammaConvention {
  helstrom,       // (1/2)(rho_pol(1) - rho_pol(0)); the default
  paper_literal,  // off-diagonal (1/2) sum lambda (a1 conj(b0) - a0 conj(b1))
};

/// Gamma from the channel's polarization-reduced outputs. The Helstrom form
/// reproduces the stated diagonal exactly and gives zero error on the ideal
/// channel; the paper-literal off-diagonal is kept for comparison.
inline GammaOperator gamma_operator(const ChannelModel& model,
                                    GammaConvention convention = GammaConvention::helstrom) {
  GammaOperator g;
  for (const ChannelMode& m : model.modes) {
    const PolarizationVector& p0 = m.pol_out[0];
    const PolarizationVector& p1 = m.pol_out[1];
    g.g00 += 0.5 * m.weight * (std::norm(p1.a) - std::norm(p0.a));
    g.g11 += 0.5 * m.weight * (std::norm(p1.b) - std::norm(p0.b));
    if (convention == GammaConvention::helstrom)
      g.g01 += 0.5 * m.weight * (p1.a * std::conj(p1.b) - p0.a * std::conj(p0.b));
    else
      g.g01 += 0.5 * m.weight * (p1.a * std::conj(p0.b) - p0.a * std::conj(p1.b));
  }
  return g;
}

/// Smaller eigenvalue of Gamma:
/// (1/2)(g00+g11) - (1/2) sqrt((g00-g11)^2 + 4|g01|^2).
inline double gamma2(const GammaOperator& g) {
  double d = g.g00 - g.g11;
  return 0.5 * (g.g00 + g.g11) - 0.5 * std::sqrt(d * d + 4.0 * std::norm(g.g01));
}

/// Two-outcome polarization POVM E0 + E1 = I.
struct PolarizationPOVM {
  Mat2 e0;
  Mat2 e1;

  static PolarizationPOVM computational() {
    return {Mat2::projector(PolarizationVector::e0()), Mat2::projector(PolarizationVector::e1())};
  }

  static PolarizationPOVM from_projector(const PolarizationVector& v) {
    Mat2 p = Mat2::projector(v);
    return {p, Mat2::identity() - p};
  }
};

/// E0 projects onto the eigenvector of Gamma with the negative eigenvalue.
/// A zero Gamma has no preferred basis; the computational basis is the fixed
/// convention for determinism.
inline PolarizationPOVM optimal_povm(const GammaOperator& g) {
  if (g.is_zero()) return PolarizationPOVM::computational();
  double lo = gamma2(g);
  if (std::abs(g.g01) <= 1e-14) {
    return g.g00 <= g.g11 ? PolarizationPOVM::computational()
                          : PolarizationPOVM::from_projector(PolarizationVector::e1());
  }
  // (Gamma - lo I) annihilates (lo - g11, conj(g01)).
  PolarizationVector v{Complex(lo - g.g11, 0.0), std::conj(g.g01)};
  return PolarizationPOVM::from_projector(pol_normalized(v));
}

// ---------------------------------------------------------------------------
// Error probabilities

/// Error of the window-restricted measurement: outcomes inside the window
/// identify the bit exactly, outcomes outside force a fair guess, so
/// P_e = 0 * N(window) + (1/2) * N(complement).
inline double restricted_error(const Amplitude& a, const Window& w) {
  return 0.5 * (squared_norm(a) - window_mass(a, w));
}

/// Probability of any detection inside the window:
/// sum_i lambda_i * integral_w |u_i|^2.
inline double windowed_detection_prob(const OutputEnsemble& ens, const Window& w) {
  double acc = 0.0;
  for (const WeightedState& c : ens.components) acc += c.weight * window_mass(c.amplitude, w);
  return acc;
}

/// Minimal full-access polarization discrimination error, 1/2 - |gamma2|.
/// Equals (1/2)(1 - sum lambda) plus the two misidentification traces under
/// the optimal POVM.
inline double full_access_error(const ChannelModel& model) {
  return 0.5 - std::abs(gamma2(gamma_operator(model)));
}

/// Probability of the perp outcome (orthogonal to every honest output mode):
/// sum_k eta_k (1 - sum_i |<eta_k|u_i>|^2). Zero for honest non-delayed
/// inputs; clamped to [0, 1].
inline double perp_probability(const GeneralOutput& out, const ChannelModel& model) {
  double acc = 0.0;
  for (const WeightedState& c : out) {
    double covered = 0.0;
    for (const ChannelMode& m : model.modes)
      covered += std::norm(inner_product(c.amplitude, m.profile));
    acc += c.weight * std::max(0.0, 1.0 - covered);
  }
  return std::clamp(acc, 0.0, 1.0);
}

/// Maximum squared overlap of any output component with any honest mode
/// profile. For genuinely delayed inputs this cannot exceed 1/2 (the delayed
/// state misses the front half of every u_i); a value above the bound flags
/// the input as not delayed.
struct OverlapBoundReport {
  double max_overlap = 0.0;
  std::size_t component_index = 0;
  std::size_t mode_index = 0;
  double bound = 0.5;
  bool within_bound = true;  // false means the input was not a delayed state
};

inline OverlapBoundReport overlap_bound_check(const GeneralOutput& out, const ChannelModel& model,
                                              double delta) {
  OverlapBoundReport report;
  report.bound = 0.5 + delta;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
      double o = std::norm(inner_product(out[k].amplitude, model.modes[i].profile));
      if (o > report.max_overlap) {
        report.max_overlap = o;
        report.component_index = k;
        report.mode_index = i;
      }
    }
  }
  report.within_bound = report.max_overlap <= report.bound;
  return report;
}

// ---------------------------------------------------------------------------
// Outcome sampling

/// One detection event on B's side.
struct Outcome {
  enum class Kind { ModePol, Perp, NoClick };
  Kind kind = Kind::NoClick;
  std::size_t mode = 0;  // valid for ModePol
  int pol = 0;           // valid for ModePol
  std::optional<double> time_tag;
};

/// Precomputed sampler for the identity resolution {P_i x E_r, P_perp}
/// restricted to a spatio-temporal window. Component k is projected onto the
/// mode profiles; the uncovered remainder feeds the perp outcome; whatever
/// probability is left (absorption plus out-of-window mass) is NoClick.
/// Deterministic given the Rng; safe to share across threads once built.
class OutcomeSampler {
 public:
  OutcomeSampler(const std::vector<WeightedState>& components, const ChannelModel& model,
                 const PolarizationPOVM& povm, const Window& window)
      : grid_(model.input.grid), dt_(model.input.grid.dt()) {
    const std::size_t n_modes = model.modes.size();
    std::vector<double> mode_window_mass(n_modes);
    std::vector<double> mode_pol_prob[2];
    mode_pol_prob[0].assign(n_modes, 0.0);
    mode_pol_prob[1].assign(n_modes, 0.0);
    for (std::size_t i = 0; i < n_modes; ++i)
      mode_window_mass[i] = window_mass(model.modes[i].profile, window);

    // Accumulate P(mode i, pol r) over components; the time distribution
    // given outcome i is |u_i|^2 in the window, independent of the component.
    std::vector<double> mode_prob[2];
    mode_prob[0].assign(n_modes, 0.0);
    mode_prob[1].assign(n_modes, 0.0);
    double total = 0.0;
    for (const WeightedState& c : components) {
      double covered = 0.0;
      double pr[2] = {povm.e0.expectation(c.polarization), povm.e1.expectation(c.polarization)};
      for (std::size_t i = 0; i < n_modes; ++i) {
        double overlap = std::norm(inner_product(c.amplitude, model.modes[i].profile));
        covered += overlap;
        for (int r = 0; r < 2; ++r)
          mode_prob[r][i] += c.weight * overlap * pr[r] * mode_window_mass[i];
      }
      double perp = c.weight * std::max(0.0, 1.0 - covered) * window_mass(c.amplitude, window);
      if (perp > 0.0) {
        entries_.push_back({perp, Outcome::Kind::Perp, 0, 0,
                            static_cast<std::size_t>(cdfs_.size())});
        cdfs_.push_back(make_cdf(c.amplitude, window));
        total += perp;
      }
    }
    for (std::size_t i = 0; i < n_modes; ++i) {
      std::size_t cdf_index = cdfs_.size();
      bool cdf_made = false;
      for (int r = 0; r < 2; ++r) {
        if (mode_prob[r][i] <= 0.0) continue;
        if (!cdf_made) {
          cdfs_.push_back(make_cdf(model.modes[i].profile, window));
          cdf_made = true;
        }
        entries_.push_back({mode_prob[r][i], Outcome::Kind::ModePol, i, r, cdf_index});
        total += mode_prob[r][i];
      }
    }
    if (total > 1.0 + 1e-9)
      throw std::logic_error("OutcomeSampler: outcome probabilities exceed 1");
    double cum = 0.0;
    for (Entry& e : entries_) {
      cum += e.prob;
      e.cum = cum;
    }
    total_prob_ = total;
  }

  Outcome draw(Rng& rng) const {
    double u = rng.uniform01();
    if (u >= total_prob_) return Outcome{Outcome::Kind::NoClick, 0, 0, std::nullopt};
    for (const Entry& e : entries_) {
      if (u < e.cum) {
        Outcome o;
        o.kind = e.kind;
        o.mode = e.mode;
        o.pol = e.pol;
        o.time_tag = draw_time(e.cdf, rng);
        return o;
      }
    }
    return Outcome{Outcome::Kind::NoClick, 0, 0, std::nullopt};
  }

  double click_probability() const { return total_prob_; }

 private:
  struct Entry {
    double prob = 0.0;
    Outcome::Kind kind = Outcome::Kind::NoClick;
    std::size_t mode = 0;
    int pol = 0;
    std::size_t cdf = 0;
    double cum = 0.0;
  };

  struct Cdf {
    std::vector<double> cum;  // cumulative |a|^2 over window samples
    std::vector<std::size_t> index;
  };

  Cdf make_cdf(const Amplitude& a, const Window& w) const {
    Cdf c;
    double acc = 0.0;
    for (const auto& [i0, i1] : w.index_ranges(a.grid)) {
      for (std::size_t i = i0; i <= i1; ++i) {
        acc += std::norm(a.samples[i]);
        c.cum.push_back(acc);
        c.index.push_back(i);
      }
    }
    return c;
  }

  double draw_time(std::size_t cdf_index, Rng& rng) const {
    const Cdf& c = cdfs_[cdf_index];
    if (c.cum.empty() || c.cum.back() <= 0.0) return grid_.t_min;
    double u = rng.uniform01() * c.cum.back();
    std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(c.cum.begin(), c.cum.end(), u) - c.cum.begin());
    pos = std::min(pos, c.cum.size() - 1);
    return grid_.tau(c.index[pos]);
  }

  TauGrid grid_;
  double dt_;
  double total_prob_ = 0.0;
  std::vector<Entry> entries_;
  std::vector<Cdf> cdfs_;
};

/// Single-draw conveniences over OutcomeSampler.
inline Outcome sample_outcome(const OutputEnsemble& ens, const ChannelModel& model,
                              const PolarizationPOVM& povm, const Window& w, Rng& rng) {
  return OutcomeSampler(ens.components, model, povm, w).draw(rng);
}

inline Outcome sample_outcome(const GeneralOutput& out, const ChannelModel& model,
                              const PolarizationPOVM& povm, const Window& w, Rng& rng) {
  return OutcomeSampler(out, model, povm, w).draw(rng);
}

}  // namespace relbc
