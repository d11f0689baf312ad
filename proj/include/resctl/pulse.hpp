#pragma once

// Gaussian pulse basis, analytic finite-time Fourier transform and the
// d-coefficient expansion of a spectral target.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "resctl/errors.hpp"
#include "resctl/faddeeva.hpp"
#include "resctl/types.hpp"

namespace resctl {

struct GaussianPulse {
  double eps = 1.0;    // amplitude
  double alpha = 1.0;  // fs
  double omega = 0.0;  // rad/fs

  friend bool operator==(const GaussianPulse&, const GaussianPulse&) = default;
};

/// 4 sqrt(2 ln 2) alpha: time after which a pulse of width alpha is over.
inline double pulse_over_time(double alpha) { return 4.0 * std::sqrt(2.0 * std::log(2.0)) * alpha; }

inline void validate(const GaussianPulse& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw ValidationError("must be positive", "alpha");
  if (!(p.eps > 0.0) || !std::isfinite(p.eps)) throw ValidationError("must be positive", "eps");
  if (!std::isfinite(p.omega)) throw ValidationError("must be finite", "omega");
}

struct GaussianBasis {
  std::vector<GaussianPulse> pulses;
  double t_over = 0.0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(pulses.size()); }
};

inline GaussianBasis make_basis(std::vector<GaussianPulse> pulses) {
  if (pulses.empty()) throw ValidationError("basis needs at least one pulse", "pulses");
  GaussianBasis b;
  for (const auto& p : pulses) {
    validate(p);
    b.t_over = std::max(b.t_over, pulse_over_time(p.alpha));
  }
  b.pulses = std::move(pulses);
  return b;
}

/// One pulse per grid frequency, all with the same alpha and eps.
inline GaussianBasis uniform_basis(const RVector& omega_grid, double alpha, double eps = 1.0) {
  std::vector<GaussianPulse> pulses;
  pulses.reserve(static_cast<std::size_t>(omega_grid.size()));
  for (Eigen::Index i = 0; i < omega_grid.size(); ++i) pulses.push_back({eps, alpha, omega_grid(i)});
  return make_basis(std::move(pulses));
}

/// eps_a(omega) = eps exp(-alpha^2 (omega - omega_a)^2).
inline cplx ftft_gaussian_infinite(const GaussianPulse& p, double omega) {
  const double u = p.alpha * (omega - p.omega);
  return p.eps * std::exp(-u * u);
}

/// Integral of eps_a(t') exp(i omega t') over (-inf, t].
///
/// With u = alpha (omega - omega_a), s = t / (2 alpha) the closed form is
/// (eps/2) exp(-u^2) erfc(-s + iu). The exponentials are merged before
/// evaluation so W is only ever called in the upper half-plane.
inline cplx ftft_gaussian(const GaussianPulse& p, double omega, double t) {
  const double u = p.alpha * (omega - p.omega);
  const double s = t / (2.0 * p.alpha);
  const cplx phase = std::exp(cplx{-s * s, 2.0 * s * u});
  if (s >= 0.0) return 0.5 * p.eps * (2.0 * std::exp(-u * u) - phase * faddeeva({u, s}));
  return 0.5 * p.eps * phase * faddeeva({-u, -s});
}

/// eps_a(t) = eps / (2 sqrt(pi) alpha) exp(-(t / 2 alpha)^2 - i omega_a t).
inline cplx pulse_time(const GaussianPulse& p, double t) {
  const double s = t / (2.0 * p.alpha);
  return p.eps / (2.0 * std::sqrt(kPi) * p.alpha) * std::exp(cplx{-s * s, -p.omega * t});
}

/// B[A, a] = eps_a(omega_A, t); nullopt selects the infinite-time transform.
inline CMatrix basis_matrix(const GaussianBasis& basis, const RVector& omega_grid, std::optional<double> t) {
  CMatrix B(omega_grid.size(), basis.size());
  for (Eigen::Index a = 0; a < basis.size(); ++a) {
    const auto& p = basis.pulses[static_cast<std::size_t>(a)];
    for (Eigen::Index A = 0; A < omega_grid.size(); ++A) {
      B(A, a) = t ? ftft_gaussian(p, omega_grid(A), *t) : ftft_gaussian_infinite(p, omega_grid(A));
    }
  }
  return B;
}

/// 2-norm condition number; +inf for a singular or non-square matrix.
inline double condition_number(const CMatrix& B) {
  if (B.rows() != B.cols() || B.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<CMatrix> svd(B);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

inline constexpr double kDefaultConditionCap = 1e12;

/// A spectral field expanded over a Gaussian basis.
struct ShapedField {
  GaussianBasis basis;
  CVector d;
  RVector omega_grid;

  Eigen::Index size() const { return d.size(); }
};

/// d = B^{-1} target with the infinite-time B.
inline ShapedField solve_d(const GaussianBasis& basis, const RVector& omega_grid, const CVector& target,
                           double cond_cap = kDefaultConditionCap) {
  if (omega_grid.size() != basis.size()) throw ValidationError("grid length must equal basis size", "omega_grid");
  if (target.size() != omega_grid.size()) throw ValidationError("length must equal grid length", "target");
  if (!target.allFinite()) throw ValidationError("non-finite value", "target");
  const CMatrix B = basis_matrix(basis, omega_grid, std::nullopt);
  const double cond = condition_number(B);
  if (!(cond <= cond_cap)) throw IllConditionedError("Gaussian basis matrix B", cond, cond_cap);
  ShapedField f{basis, B.fullPivLu().solve(target), omega_grid};
  const double scale = target.cwiseAbs().maxCoeff();
  const double resid = (B * f.d - target).cwiseAbs().maxCoeff();
  if (resid > 1e-10 * scale) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "d-coefficient solve residual %.3e exceeds 1e-10 (condition estimate %.3e)", resid / scale, cond);
    throw NumericalError(buf);
  }
  return f;
}

/// eps_p(omega_A, t) = B(t) d at the field's own grid; nullopt for infinite time.
inline CVector spectral_values(const ShapedField& f, std::optional<double> t = std::nullopt) {
  return basis_matrix(f.basis, f.omega_grid, t) * f.d;
}

/// eps_p(omega, t) at arbitrary frequencies.
inline CVector spectral_values_at(const ShapedField& f, const RVector& omega, std::optional<double> t = std::nullopt) {
  return basis_matrix(f.basis, omega, t) * f.d;
}

/// eps_p(t) = sum_a d_a eps_a(t).
inline CVector field_time_profile(const ShapedField& f, const RVector& t_grid) {
  CVector out = CVector::Zero(t_grid.size());
  for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
    cplx acc{};
    for (Eigen::Index a = 0; a < f.size(); ++a) acc += f.d(a) * pulse_time(f.basis.pulses[static_cast<std::size_t>(a)], t_grid(i));
    out(i) = acc;
  }
  return out;
}

}  // namespace resctl
