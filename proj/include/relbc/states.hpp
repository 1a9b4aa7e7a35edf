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
#include <optional>
#include <stdexcept>

#include "relbc/grid.hpp"

namespace relbc {

/// Parameters of the double-hump wavepacket: hump width sigma, half
/// separation tau0, half-localization window delta_tau, and the tail-mass
/// budget delta. delta is a *budget*: constructions measure the achieved
/// tail mass rather than assuming it.
struct WavepacketSpec {
  double sigma = 1.0;
  double tau0 = 20.0;
  double delta_tau = 5.0;
  double delta = 1e-6;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("WavepacketSpec: sigma must be positive");
    if (!(delta_tau <= tau0 / 4.0))
      throw std::invalid_argument("WavepacketSpec: requires delta_tau <= tau0/4");
    if (!(sigma < delta_tau))
      throw std::invalid_argument("WavepacketSpec: requires sigma < delta_tau");
    if (!(delta > 0.0 && delta <= 1e-3))
      throw std::invalid_argument("WavepacketSpec: delta must lie in (0, 1e-3]");
  }
};

/// Unit vector in the (e0, e1) polarization basis.
struct PolarizationVector {
  Complex a{1.0, 0.0};  // component along e0
  Complex b{0.0, 0.0};  // component along e1

  static PolarizationVector e0() { return {Complex(1, 0), Complex(0, 0)}; }
  static PolarizationVector e1() { return {Complex(0, 0), Complex(1, 0)}; }

  double squared_norm() const { return std::norm(a) + std::norm(b); }

  void check_unit(double tol = 1e-12) const {
    if (std::abs(squared_norm() - 1.0) > tol)
      throw std::invalid_argument("PolarizationVector: not unit norm");
  }
};

inline Complex pol_inner(const PolarizationVector& p, const PolarizationVector& q) {
  return p.a * std::conj(q.a) + p.b * std::conj(q.b);
}

inline PolarizationVector pol_normalized(PolarizationVector p) {
  double n = std::sqrt(p.squared_norm());
  if (n <= 0.0) throw std::invalid_argument("cannot normalize zero polarization");
  p.a /= n;
  p.b /= n;
  return p;
}

/// Real rotation of the basis vector e_b by angle theta (Bloch great circle).
inline PolarizationVector pol_rotated(int bit, double theta) {
  if (bit == 0) return {Complex(std::cos(theta), 0), Complex(std::sin(theta), 0)};
  return {Complex(-std::sin(theta), 0), Complex(std::cos(theta), 0)};
}

/// Single-photon protocol state: spatio-temporal amplitude x polarization.
/// bit_label is set for the two honest states (polarization exactly e0/e1).
struct PhotonState {
  Amplitude amplitude;
  PolarizationVector polarization;
  std::optional<int> bit_label;
};

/// Default grid: [-8 sigma, tau0 + 8 sigma + extra_tail] at >= 64 samples per
/// sigma. Tail truncation is below 1e-12, far under any protocol tolerance,
/// and the step divides sigma so shifts by sigma-multiples are exact.
inline TauGrid default_grid(const WavepacketSpec& spec, double extra_tail = 0.0) {
  double lo = -8.0 * spec.sigma;
  double hi = spec.tau0 + 8.0 * spec.sigma + extra_tail;
  double span = hi - lo;
  std::size_t steps = static_cast<std::size_t>(std::ceil(span / spec.sigma)) * 64;
  hi = lo + static_cast<double>(steps) * (spec.sigma / 64.0);
  return TauGrid(lo, hi, steps + 1);
}

/// Normalized hump with Gaussian modulus: |f|^2 is the normal density with
/// the given mean and std. Real and positive; the protocol only ever uses
/// |f|^2, never the phase.
inline Amplitude make_hump(double sigma, double center, const TauGrid& grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("make_hump: sigma must be positive");
  if (grid.t_min > center - 6.0 * sigma || grid.t_max < center + 6.0 * sigma)
    throw std::invalid_argument(
        "make_hump: grid must span center +- 6 sigma (truncation would exceed the tail budget)");
  Amplitude a = Amplitude::zeros(grid);
  const double prefactor = std::pow(2.0 * M_PI * sigma * sigma, -0.25);
  for (std::size_t i = 0; i < grid.n_samples; ++i) {
    double x = (grid.tau(i) - center) / sigma;
    a.samples[i] = Complex(prefactor * std::exp(-0.25 * x * x), 0.0);
  }
  return normalized(a);
}

/// F(tau) = [f(tau) + f(tau - tau0)] / sqrt(2): two strongly localized halves
/// separated by tau0, each carrying half the norm. Renormalized on the grid
/// so the squared norm is 1 to machine accuracy.
inline Amplitude make_double_hump(const WavepacketSpec& spec, const TauGrid& grid) {
  spec.validate();
  Amplitude front = make_hump(spec.sigma, 0.0, grid);
  Amplitude back = make_hump(spec.sigma, spec.tau0, grid);
  Amplitude out = Amplitude::zeros(grid);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < grid.n_samples; ++i)
    out.samples[i] = inv_sqrt2 * (front.samples[i] + back.samples[i]);
  return normalized(out);
}

/// Largest deficit of the two half-window masses from 1/2: the achieved delta
/// of Eq.-9-style localization for a double-hump amplitude.
inline double achieved_delta(const Amplitude& a, double center_front, double center_back,
                             double half_width) {
  double front = window_mass(a, Window::interval(center_front - half_width, center_front + half_width));
  double back = window_mass(a, Window::interval(center_back - half_width, center_back + half_width));
  return std::max(0.5 - front, 0.5 - back);
}

/// One of the two honest input states: double-hump amplitude with
/// polarization exactly e0 or e1.
inline PhotonState make_input_state(int bit, const WavepacketSpec& spec, const TauGrid& grid) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("make_input_state: bit must be 0 or 1");
  PhotonState s;
  s.amplitude = make_double_hump(spec, grid);
  s.polarization = bit == 0 ? PolarizationVector::e0() : PolarizationVector::e1();
  s.bit_label = bit;
  return s;
}

}  // namespace relbc
