#pragma once

// Coarse-grained propagation: tau factors, M/K kernels for the c-controlled and
// laser-driven pathways, and P_S2(t).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resctl/parallel.hpp"
#include "resctl/pulse.hpp"
#include "resctl/system.hpp"

namespace resctl {

struct TauFactors {
  double t = 0.0;
  CVector tau;
  /// False when |t| > 0.5 * 2 hbar / Delta_alpha for some contributing state.
  bool valid = true;
};

namespace detail {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

inline bool coarse_grain_valid(const ResonanceSystem& sys, double t) {
  return std::abs(t) * sys.Delta_alpha.maxCoeff() <= sys.hbar;
}

}  // namespace detail

/// tau_alpha(t) = exp(-i E_alpha t / hbar) sinc(Delta_alpha t / (2 hbar)).
inline TauFactors tau(const ResonanceSystem& sys, double t) {
  TauFactors out{t, CVector(sys.n_alpha()), detail::coarse_grain_valid(sys, t)};
  for (Eigen::Index a = 0; a < sys.n_alpha(); ++a) {
    const double x = sys.Delta_alpha(a) * t / (2.0 * sys.hbar);
    out.tau(a) = std::polar(detail::sinc(x), -sys.E_alpha(a) * t / sys.hbar);
  }
  return out;
}

/// tau^A_A(t): mean of tau_alpha(t) over the members of bin A.
inline TauFactors tau(const BinnedSystem& b, double t) {
  const TauFactors full = tau(*b.parent, t);
  TauFactors out{t, CVector(b.n_bins()), full.valid};
  for (Eigen::Index A = 0; A < b.n_bins(); ++A) {
    const auto& m = b.members[static_cast<std::size_t>(A)];
    cplx acc{};
    for (auto a : m) acc += full.tau(a);
    out.tau(A) = acc / static_cast<double>(m.size());
  }
  return out;
}

struct KernelMatrices {
  double t = 0.0;
  CMatrix M;
  CMatrix K;  // M^dagger M
  bool tau_valid = true;
};

/// M^c(t) = R^dagger diag(tau(t)) R, N_Q x N_Q.
inline KernelMatrices build_Mc(const ResonanceSystem& sys, double t) {
  const TauFactors tf = tau(sys, t);
  KernelMatrices k{t, sys.R.adjoint() * tf.tau.asDiagonal() * sys.R, {}, tf.valid};
  k.K = k.M.adjoint() * k.M;
  return k;
}

/// M^{eps,A}(t) = R_A^dagger diag(tau^A(t)) diag(mu_A), N_Q x N_A.
inline CMatrix laser_M(const BinnedSystem& b, const TauFactors& tf) {
  return b.R_A.adjoint() * tf.tau.cwiseProduct(b.mu_A).asDiagonal();
}

inline KernelMatrices build_Me(const BinnedSystem& b, double t) {
  const TauFactors tf = tau(b, t);
  KernelMatrices k{t, laser_M(b, tf), {}, tf.valid};
  k.K = k.M.adjoint() * k.M;
  return k;
}

/// P_S2 = eps^dagger K(t) eps for a spectral vector over the bins.
inline double population_spectral(const CVector& eps, const BinnedSystem& b, double t) {
  if (eps.size() != b.n_bins()) throw ValidationError("length must equal the number of bins", "field");
  return (laser_M(b, tau(b, t)) * eps).squaredNorm();
}

/// Field spectrum at the bin frequencies accumulated up to time t: finite-time
/// B(t) before the basis' t_over, infinite-time B from then on.
inline CVector accumulated_spectrum(const ShapedField& f, double t) {
  if (t < f.basis.t_over) return spectral_values(f, t);
  return spectral_values(f, std::nullopt);
}

/// P_S2(t) = d^dagger B(t)^dagger K(t) B(t) d.
inline double population(const ShapedField& f, const BinnedSystem& b, double t) {
  if (f.omega_grid.size() != b.n_bins()) throw ValidationError("field grid does not match the bins", "field");
  return population_spectral(accumulated_spectrum(f, t), b, t);
}

/// P_S2 = c^dagger K^c(t) c for an already-excited resonance superposition.
inline double population_c(const CVector& c, const ResonanceSystem& sys, double t) {
  if (c.size() != sys.n_q()) throw ValidationError("length must equal N_Q", "c");
  const TauFactors tf = tau(sys, t);
  return (sys.R.adjoint() * (tf.tau.asDiagonal() * (sys.R * c))).squaredNorm();
}

/// Total first-order excited norm: sum over coarse-grained states of
/// |mu_alpha eps(omega_A, t)|^2, with eps taken constant across each bin.
inline double excited_norm(const CVector& eps, const BinnedSystem& b) {
  const CVector mu_alpha = doorway_dipoles(*b.parent);
  double total = 0.0;
  for (Eigen::Index A = 0; A < b.n_bins(); ++A) {
    double w = 0.0;
    for (auto a : b.members[static_cast<std::size_t>(A)]) w += std::norm(mu_alpha(a));
    total += w * std::norm(eps(A));
  }
  return total;
}

struct PopulationTrace {
  RVector t;
  RVector P_S2;
  RVector P_S1_remainder;  // excited norm - P_S2
  RVector envelope;        // |eps_p(t)|
  bool tau_valid = true;   // false if any t left the coarse-graining regime
};

inline PopulationTrace population_trace(const ShapedField& f, const BinnedSystem& b, const RVector& t_grid,
                                        unsigned threads = 1) {
  if (f.omega_grid.size() != b.n_bins()) throw ValidationError("field grid does not match the bins", "field");
  const auto n = static_cast<std::size_t>(t_grid.size());
  PopulationTrace tr{t_grid, RVector(t_grid.size()), RVector(t_grid.size()), RVector(t_grid.size()), true};
  std::vector<char> valid(n, 1);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double t = t_grid(k);
    const CVector eps = accumulated_spectrum(f, t);
    const TauFactors tf = tau(b, t);
    tr.P_S2(k) = (laser_M(b, tf) * eps).squaredNorm();
    tr.P_S1_remainder(k) = excited_norm(eps, b) - tr.P_S2(k);
    valid[i] = tf.valid ? 1 : 0;
  });
  tr.envelope = field_time_profile(f, t_grid).cwiseAbs();
  for (char v : valid) tr.tau_valid = tr.tau_valid && v;
  return tr;
}

/// c-controlled counterpart of population_trace (no field envelope).
inline RVector population_c_trace(const CVector& c, const ResonanceSystem& sys, const RVector& t_grid,
                                  unsigned threads = 1) {
  RVector out(t_grid.size());
  parallel_for(static_cast<std::size_t>(t_grid.size()), threads, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    out(k) = population_c(c, sys, t_grid(k));
  });
  return out;
}

/// c_kappa = (i/hbar) <kappa|mu|g>: the resonance superposition prepared by a delta pulse.
inline CVector doorway_superposition(const ResonanceSystem& sys) { return cplx{0.0, 1.0 / sys.hbar} * sys.mu_kappa; }

}  // namespace resctl
