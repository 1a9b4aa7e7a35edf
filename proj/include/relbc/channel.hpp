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
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "relbc/grid.hpp"
#include "relbc/states.hpp"

namespace relbc {

/// Thrown by apply_channel when the input is not one of the two agreed
/// honest states. Dishonest inputs go through apply_channel_general.
struct honest_subspace_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// One spectral mode of the channel instrument: weight lambda, normalized
/// output profile u_i, and the output polarization reached from each of the
/// two honest input polarizations.
struct ChannelMode {
  double weight = 1.0;            // lambda_i in (0, 1]
  Amplitude profile;              // u_i, normalized
  PolarizationVector pol_out[2];  // images of e0 and e1
};

/// The channel instrument in spectral form: the affine map sending an honest
/// input to the weighted mode ensemble, with 1 - sum(lambda) absorbed. The
/// agreed input amplitude F is part of the channel description (the
/// instrument is defined relative to it), as is the output localization
/// window half-width Dtau.
struct ChannelModel {
  std::string name = "custom";
  std::vector<ChannelMode> modes;
  double d_tau = 8.0;  // output half-localization window Dtau
  Amplitude input;     // the agreed double-hump F
};

inline double detection_probability(const ChannelModel& model) {
  double s = 0.0;
  for (const ChannelMode& m : model.modes) s += m.weight;
  return s;
}

/// Weighted pure component of a (possibly sub-normalized) spatial x
/// polarization ensemble. Used for both mixed inputs and channel outputs.
struct WeightedState {
  double weight = 1.0;
  Amplitude amplitude;
  PolarizationVector polarization;
};

/// Mixed input state: sum_l mu_l |mu_l><mu_l| with sum mu_l = 1.
struct MixedInput {
  std::vector<WeightedState> components;

  void validate() const {
    double total = 0.0;
    for (const WeightedState& c : components) {
      if (!(c.weight > 0.0)) throw std::invalid_argument("MixedInput: weights must be positive");
      if (std::abs(squared_norm(c.amplitude) - 1.0) > 1e-9)
        throw std::invalid_argument("MixedInput: component amplitudes must be normalized");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("MixedInput: weights must sum to 1");
  }
};

/// Channel output for an honest input: components (lambda_i, u_i, pol) plus
/// the absorption deficit.
struct OutputEnsemble {
  std::vector<WeightedState> components;
  double absorption = 0.0;
};

using GeneralOutput = std::vector<WeightedState>;

// ---------------------------------------------------------------------------
// Validation

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_pass() const {
    for (const ValidationCheck& c : checks)
      if (!c.pass) return false;
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    for (const ValidationCheck& c : checks) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", c.measured);
      os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": measured " << buf;
      if (!c.detail.empty()) os << " (" << c.detail << ")";
      os << "\n";
    }
    return os.str();
  }
};

inline constexpr double kOrthonormalityTol = 1e-8;

/// Check the model against the channel suitability conditions:
///  (a) sum(lambda) <= 1,
///  (b) pairwise orthonormal profiles,
///  (c) half-mass localization of every |u_i|^2 in the two Dtau windows,
///  (d) causality: no profile's leading front precedes the input's front.
/// Failures are reported, never thrown.
inline ValidationReport validate_channel(const ChannelModel& model, const WavepacketSpec& spec) {
  ValidationReport report;

  double weight_sum = detection_probability(model);
  report.checks.push_back({"weight_sum", weight_sum <= 1.0 + 1e-12, weight_sum,
                           "sum(lambda) must not exceed 1"});

  double worst_orth = 0.0;
  for (std::size_t i = 0; i < model.modes.size(); ++i) {
    for (std::size_t j = i; j < model.modes.size(); ++j) {
      double overlap = std::abs(inner_product(model.modes[i].profile, model.modes[j].profile));
      double dev = i == j ? std::abs(1.0 - overlap) : overlap;
      worst_orth = std::max(worst_orth, dev);
    }
  }
  report.checks.push_back({"orthonormality", worst_orth <= kOrthonormalityTol, worst_orth,
                           "max |<u_i|u_j> - delta_ij|"});

  double worst_delta = 0.0;
  for (const ChannelMode& m : model.modes)
    worst_delta = std::max(worst_delta, achieved_delta(m.profile, 0.0, spec.tau0, model.d_tau));
  report.checks.push_back({"localization", worst_delta <= spec.delta, worst_delta,
                           "achieved delta of the half-mass windows"});

  for (double eps : {0.01, 0.25}) {
    double margin = 0.0;
    bool pass = true;
    if (!model.modes.empty()) {
      double input_start = support_start(model.input, eps);
      margin = 1e300;
      for (const ChannelMode& m : model.modes)
        margin = std::min(margin, support_start(m.profile, eps) - input_start);
      pass = margin >= -model.input.grid.dt() * (1.0 + 1e-9);
    }
    char name[48];
    std::snprintf(name, sizeof(name), "causality(eps=%.2f)", eps);
    report.checks.push_back({name, pass, margin, "min front margin over modes, tau units"});
  }

  return report;
}

// ---------------------------------------------------------------------------
// Application

/// Overlap of the state with the agreed honest amplitude.
inline double honest_overlap(const ChannelModel& model, const Amplitude& a) {
  return std::norm(inner_product(a, model.input));
}

/// Apply the instrument to one of the two honest inputs.
inline OutputEnsemble apply_channel(const ChannelModel& model, const PhotonState& input) {
  if (!input.bit_label.has_value())
    throw honest_subspace_error("apply_channel: input carries no honest bit label");
  if (std::abs(honest_overlap(model, input.amplitude) - 1.0) > 1e-9)
    throw honest_subspace_error(
        "apply_channel: input amplitude is not the agreed F (use apply_channel_general)");
  OutputEnsemble out;
  const int b = *input.bit_label;
  for (const ChannelMode& m : model.modes)
    out.components.push_back({m.weight, m.profile, m.pol_out[b]});
  out.absorption = 1.0 - detection_probability(model);
  return out;
}

/// Extend the instrument to arbitrary inputs by time-translation covariance:
/// a component equal to F delayed by s maps to (lambda_i, u_i delayed by s);
/// whatever part of a component lies outside the shifted honest subspace is
/// treated as absorbed. Polarizations map linearly through the per-mode
/// images of e0 and e1.
inline GeneralOutput apply_channel_general(const ChannelModel& model, const MixedInput& input) {
  input.validate();
  GeneralOutput out;
  const double dt = model.input.grid.dt();
  const double ref_start = support_start(model.input, 0.5);
  for (const WeightedState& comp : input.components) {
    double start = support_start(comp.amplitude, 0.5);
    std::ptrdiff_t steps = static_cast<std::ptrdiff_t>(std::llround((start - ref_start) / dt));
    Amplitude ref = shifted(model.input, steps, 1e-6);
    double overlap = std::norm(inner_product(comp.amplitude, ref));
    if (overlap < 1e-12) continue;  // orthogonal to the shifted honest subspace: lost
    for (const ChannelMode& m : model.modes) {
      PolarizationVector v;
      v.a = comp.polarization.a * m.pol_out[0].a + comp.polarization.b * m.pol_out[1].a;
      v.b = comp.polarization.a * m.pol_out[0].b + comp.polarization.b * m.pol_out[1].b;
      double vn2 = v.squared_norm();
      double w = comp.weight * overlap * m.weight * vn2;
      if (w <= 0.0) continue;
      out.push_back({w, shifted(m.profile, steps, 1e-6), pol_normalized(v)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalogue

namespace detail {

/// Gram-Schmidt in the given order; profiles must be supplied with
/// nondecreasing delay so later modes only subtract earlier (not later)
/// fronts, keeping every orthogonalized profile causal.
inline std::vector<Amplitude> orthonormalized(std::vector<Amplitude> profiles) {
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      Complex c = inner_product(profiles[i], profiles[j]);
      for (std::size_t s = 0; s < profiles[i].samples.size(); ++s)
        profiles[i].samples[s] -= c * profiles[j].samples[s];
    }
    profiles[i] = normalized(profiles[i]);
  }
  return profiles;
}

}  // namespace detail

/// Identity channel: one mode, u = F, polarizations preserved.
inline ChannelModel make_ideal_channel(const WavepacketSpec& spec, const TauGrid& grid,
                                       double d_tau = 8.0) {
  ChannelModel model;
  model.name = "ideal";
  model.d_tau = d_tau;
  model.input = make_double_hump(spec, grid);
  model.modes.push_back(
      {1.0, model.input, {PolarizationVector::e0(), PolarizationVector::e1()}});
  return model;
}

/// Single mode with both polarizations rotated by theta and weight lambda.
inline ChannelModel make_rotate_channel(const WavepacketSpec& spec, const TauGrid& grid,
                                        double theta, double lambda, double d_tau = 8.0) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("rotate channel: lambda must be in (0,1]");
  ChannelModel model;
  model.name = "rotate";
  model.d_tau = d_tau;
  model.input = make_double_hump(spec, grid);
  model.modes.push_back({lambda, model.input, {pol_rotated(0, theta), pol_rotated(1, theta)}});
  return model;
}

/// Modes built from F shifted by small s_i (nondecreasing, s_i <= Dtau -
/// delta_tau), re-orthogonalized pairwise because shifted copies of F are not
/// exactly orthogonal. Polarizations preserved.
inline ChannelModel make_jitter_channel(const WavepacketSpec& spec, const TauGrid& grid,
                                        std::vector<double> shifts, std::vector<double> lambdas,
                                        double d_tau = 8.0) {
  if (shifts.empty() || shifts.size() != lambdas.size())
    throw std::invalid_argument("jitter channel: need matching non-empty shift/weight lists");
  double weight_sum = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("jitter channel: weights must be positive");
    weight_sum += l;
  }
  if (weight_sum > 1.0 + 1e-12)
    throw std::invalid_argument("jitter channel: weights must sum to at most 1");
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (shifts[i] < 0.0 || shifts[i] > d_tau - spec.delta_tau)
      throw std::invalid_argument("jitter channel: shifts must lie in [0, Dtau - delta_tau]");
    if (i > 0 && shifts[i] < shifts[i - 1])
      throw std::invalid_argument("jitter channel: shifts must be nondecreasing");
  }
  ChannelModel model;
  model.name = "jitter";
  model.d_tau = d_tau;
  model.input = make_double_hump(spec, grid);
  std::vector<Amplitude> profiles;
  for (double s : shifts) profiles.push_back(shifted_by_tau(model.input, s));
  profiles = detail::orthonormalized(std::move(profiles));
  for (std::size_t i = 0; i < profiles.size(); ++i)
    model.modes.push_back(
        {lambdas[i], profiles[i], {PolarizationVector::e0(), PolarizationVector::e1()}});
  return model;
}

/// Maximally confusing polarization: both e0 and e1 map to e0.
inline ChannelModel make_collapse_channel(const WavepacketSpec& spec, const TauGrid& grid,
                                          double lambda, double d_tau = 8.0) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("collapse channel: lambda must be in (0,1]");
  ChannelModel model;
  model.name = "collapse";
  model.d_tau = d_tau;
  model.input = make_double_hump(spec, grid);
  model.modes.push_back({lambda, model.input, {PolarizationVector::e0(), PolarizationVector::e0()}});
  return model;
}

/// No modes: every photon is absorbed.
inline ChannelModel make_absorbing_channel(const WavepacketSpec& spec, const TauGrid& grid,
                                           double d_tau = 8.0) {
  ChannelModel model;
  model.name = "absorbing";
  model.d_tau = d_tau;
  model.input = make_double_hump(spec, grid);
  return model;
}

}  // namespace relbc
