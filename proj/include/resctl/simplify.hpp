#pragma once

// Field simplification: local averaging, re-smoothing with fewer Gaussians and
// amplitude truncation, plus the retention sweep.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "resctl/control.hpp"

namespace resctl {

namespace detail {

inline Eigen::Index super_bin_size(Eigen::Index n_A, Eigen::Index n_S) {
  if (n_S < 1 || n_S > n_A || n_A % n_S != 0) throw ValidationError("N_S must divide N_A", "N_S");
  return n_A / n_S;
}

}  // namespace detail

/// Step field: each group of N_A/N_S bins gets the mean member amplitude and the
/// circular mean of member phases, then is re-expanded over the original basis.
inline ShapedField local_average(const ShapedField& f, Eigen::Index n_S, double cond_cap = kDefaultConditionCap) {
  const auto g = detail::super_bin_size(f.size(), n_S);
  if (g == 1) return f;
  const CVector v = spectral_values(f);
  CVector step(v.size());
  for (Eigen::Index s = 0; s < n_S; ++s) {
    double amp = 0.0;
    cplx phasor{};
    for (Eigen::Index i = s * g; i < (s + 1) * g; ++i) {
      const double a = std::abs(v(i));
      amp += a;
      if (a > 0.0) phasor += v(i) / a;
    }
    amp /= static_cast<double>(g);
    const double phase = std::abs(phasor) > 0.0 ? std::arg(phasor) : 0.0;
    step.segment(s * g, g).setConstant(std::polar(amp, phase));
  }
  return solve_d(f.basis, f.omega_grid, step, cond_cap);
}

/// Expands a step-like field with N_S Gaussians centred on the super-bins
/// (same width and amplitude as the first original pulse). The result keeps
/// the original frequency grid so it can be propagated on the same bins.
inline ShapedField smooth_expand(const ShapedField& avg, Eigen::Index n_S, double cond_cap = kDefaultConditionCap) {
  const auto g = detail::super_bin_size(avg.size(), n_S);
  const CVector v = spectral_values(avg);
  RVector coarse(n_S);
  CVector target(n_S);
  for (Eigen::Index s = 0; s < n_S; ++s) {
    coarse(s) = avg.omega_grid.segment(s * g, g).mean();
    target(s) = v.segment(s * g, g).mean();
  }
  const auto& p0 = avg.basis.pulses.front();
  ShapedField out = solve_d(uniform_basis(coarse, p0.alpha, p0.eps), coarse, target, cond_cap);
  out.omega_grid = avg.omega_grid;
  return out;
}

/// Keeps the N_R largest spectral amplitudes (ties to the lower bin), zeroes
/// the rest without touching phases, and re-solves d. Amplitudes are compared
/// on a 2^-40 grid relative to the largest one so solver round-off does not split ties.
inline ShapedField truncate_amplitudes(const ShapedField& f, Eigen::Index n_R, double cond_cap = kDefaultConditionCap) {
  if (n_R < 1 || n_R > f.size()) throw ValidationError("N_R must lie in [1, N_A]", "N_R");
  if (n_R == f.size()) return f;
  const CVector v = spectral_values(f);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const double top = v.cwiseAbs().maxCoeff();
  std::vector<double> key(idx.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    key[i] = top > 0.0 ? std::round(std::ldexp(std::abs(v(static_cast<Eigen::Index>(i))) / top, 40)) : 0.0;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)]; });
  CVector kept = CVector::Zero(v.size());
  for (Eigen::Index k = 0; k < n_R; ++k) kept(idx[static_cast<std::size_t>(k)]) = v(idx[static_cast<std::size_t>(k)]);
  return solve_d(f.basis, f.omega_grid, kept, cond_cap);
}

/// P(T2) / P(T1) under full propagation.
inline double achieved_ratio(const ShapedField& f, const BinnedSystem& b, double T1, double T2) {
  return population(f, b, T2) / population(f, b, T1);
}

struct RetentionRow {
  Eigen::Index N_R = 0;
  double achieved_min = 0.0;
  double achieved_max = 0.0;
  double fresh_min = std::numeric_limits<double>::quiet_NaN();  // NaN if the fresh problem is ill-posed
  double fresh_max = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<RetentionRow> retention_sweep(const BinnedSystem& b, const ShapedField& f_min, const ShapedField& f_max,
                                                 const std::vector<Eigen::Index>& n_R_values, double T1, double T2,
                                                 double cond_cap = kDefaultConditionCap, unsigned threads = 1) {
  std::vector<RetentionRow> rows(n_R_values.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const auto nr = n_R_values[i];
    RetentionRow& r = rows[i];
    r.N_R = nr;
    r.achieved_min = achieved_ratio(truncate_amplitudes(f_min, nr, cond_cap), b, T1, T2);
    r.achieved_max = achieved_ratio(truncate_amplitudes(f_max, nr, cond_cap), b, T1, T2);
    try {
      const auto fresh = relative_control(bin_system(b.parent, b.window(), nr), T1, T2, cond_cap);
      r.fresh_min = fresh.front().lambda;
      r.fresh_max = fresh.back().lambda;
    } catch (const Error&) {
    }
  });
  return rows;
}

}  // namespace resctl
