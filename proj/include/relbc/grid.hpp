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
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace relbc {

using Complex = std::complex<double>;

/// Thrown when two amplitudes on different grids are combined.
struct grid_mismatch_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown by support_start on an (effectively) zero amplitude.
struct undefined_support_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Uniform grid in the light-cone coordinate tau = t - x (c = 1).
/// Immutable after construction; all signal ops below are pure.
struct TauGrid {
  double t_min = 0.0;
  double t_max = 1.0;
  std::size_t n_samples = 2;

  TauGrid() = default;
  TauGrid(double lo, double hi, std::size_t n) : t_min(lo), t_max(hi), n_samples(n) {
    if (n_samples < 2) throw std::invalid_argument("TauGrid: need at least 2 samples");
    if (!(t_max > t_min)) throw std::invalid_argument("TauGrid: t_max must exceed t_min");
  }

  double dt() const { return (t_max - t_min) / static_cast<double>(n_samples - 1); }
  double tau(std::size_t i) const { return t_min + static_cast<double>(i) * dt(); }

  /// Nearest sample index, clamped to the grid.
  std::size_t index_of(double tau_value) const {
    double x = (tau_value - t_min) / dt();
    if (x <= 0.0) return 0;
    std::size_t i = static_cast<std::size_t>(std::llround(x));
    return std::min(i, n_samples - 1);
  }

  bool operator==(const TauGrid& o) const {
    return t_min == o.t_min && t_max == o.t_max && n_samples == o.n_samples;
  }
};

/// Sampled complex amplitude on a TauGrid. Squared norm is the rectangle sum
/// sum |samples|^2 * dt; a normalized amplitude has squared norm ~ 1.
struct Amplitude {
  TauGrid grid;
  std::vector<Complex> samples;

  Amplitude() = default;
  Amplitude(TauGrid g, std::vector<Complex> s) : grid(g), samples(std::move(s)) {
    if (samples.size() != grid.n_samples)
      throw std::invalid_argument("Amplitude: sample count does not match grid");
  }

  static Amplitude zeros(const TauGrid& g) {
    return Amplitude(g, std::vector<Complex>(g.n_samples, Complex(0.0, 0.0)));
  }
};

inline void require_same_grid(const Amplitude& a, const Amplitude& b) {
  if (!(a.grid == b.grid)) throw grid_mismatch_error("amplitudes live on different grids");
}

/// <a|b> = sum a(tau) * conj(b(tau)) * dt (rectangle rule).
inline Complex inner_product(const Amplitude& a, const Amplitude& b) {
  require_same_grid(a, b);
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) acc += a.samples[i] * std::conj(b.samples[i]);
  return acc * a.grid.dt();
}

inline double squared_norm(const Amplitude& a) {
  double acc = 0.0;
  for (const Complex& s : a.samples) acc += std::norm(s);
  return acc * a.grid.dt();
}

inline Amplitude normalized(Amplitude a) {
  double n2 = squared_norm(a);
  if (n2 <= 0.0) throw undefined_support_error("cannot normalize the zero amplitude");
  double inv = 1.0 / std::sqrt(n2);
  for (Complex& s : a.samples) s *= inv;
  return a;
}

/// Ordered, disjoint list of closed [lo, hi] tau-intervals. Endpoints snap to
/// the nearest grid sample when a mass is taken.
struct Window {
  std::vector<std::pair<double, double>> intervals;

  Window() = default;  // empty window
  explicit Window(std::vector<std::pair<double, double>> iv) : intervals(std::move(iv)) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (!(intervals[i].first < intervals[i].second))
        throw std::invalid_argument("Window: interval must satisfy lo < hi");
      if (i > 0 && !(intervals[i].first > intervals[i - 1].second))
        throw std::invalid_argument("Window: intervals must be sorted and disjoint");
    }
  }

  static Window interval(double lo, double hi) { return Window({{lo, hi}}); }
  static Window full(const TauGrid& g) { return Window({{g.t_min, g.t_max}}); }
  bool empty() const { return intervals.empty(); }

  /// Inclusive sample-index ranges after snapping endpoints.
  std::vector<std::pair<std::size_t, std::size_t>> index_ranges(const TauGrid& g) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [lo, hi] : intervals) {
      if (hi < g.t_min || lo > g.t_max) continue;
      std::size_t i0 = g.index_of(lo);
      std::size_t i1 = g.index_of(hi);
      if (i1 >= i0) out.emplace_back(i0, i1);
    }
    return out;
  }
};

/// Mass of |a|^2 inside the window (rectangle sum over snapped samples).
inline double window_mass(const Amplitude& a, const Window& w) {
  double acc = 0.0;
  for (const auto& [i0, i1] : w.index_ranges(a.grid))
    for (std::size_t i = i0; i <= i1; ++i) acc += std::norm(a.samples[i]);
  return acc * a.grid.dt();
}

/// Smallest tau where the cumulative mass over (-inf, tau] reaches the
/// fraction eps of the total squared norm. Monotone nondecreasing in eps and
/// exactly covariant under whole-sample translations.
inline double support_start(const Amplitude& a, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("support_start: eps must be in (0,1)");
  double total = 0.0;
  for (const Complex& s : a.samples) total += std::norm(s);
  if (total <= 0.0) throw undefined_support_error("support_start of the zero amplitude");
  double target = eps * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    acc += std::norm(a.samples[i]);
    if (acc >= target) return a.grid.tau(i);
  }
  return a.grid.tau(a.grid.n_samples - 1);
}

/// Translate by a whole number of samples (positive = delay). Samples pushed
/// past the grid edge are dropped; `max_lost_mass` guards against silently
/// discarding signal.
inline Amplitude shifted(const Amplitude& a, std::ptrdiff_t steps,
                         double max_lost_mass = 1e-9) {
  Amplitude out = Amplitude::zeros(a.grid);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.grid.n_samples);
  double lost = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::ptrdiff_t j = i + steps;
    if (j < 0 || j >= n)
      lost += std::norm(a.samples[static_cast<std::size_t>(i)]);
    else
      out.samples[static_cast<std::size_t>(j)] = a.samples[static_cast<std::size_t>(i)];
  }
  if (lost * a.grid.dt() > max_lost_mass)
    throw std::invalid_argument("shifted: translation pushes non-negligible mass off the grid");
  return out;
}

/// Shift by a tau offset that must be a whole multiple of dt.
inline Amplitude shifted_by_tau(const Amplitude& a, double s, double max_lost_mass = 1e-9) {
  double steps_real = s / a.grid.dt();
  std::ptrdiff_t steps = static_cast<std::ptrdiff_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9)
    throw std::invalid_argument("shifted_by_tau: shift is not a multiple of the grid step");
  return shifted(a, steps, max_lost_mass);
}

}  // namespace relbc
