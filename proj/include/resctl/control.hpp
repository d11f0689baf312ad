#pragma once

// Absolute (single-time, rank-1 kernel) and relative (two-time ratio) control.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "resctl/dynamics.hpp"

namespace resctl {

enum class ControlKind { Absolute, Relative };

inline const char* to_string(ControlKind k) { return k == ControlKind::Absolute ? "absolute" : "relative"; }

struct ControlSolution {
  double lambda = 0.0;
  CVector field;  // spectral amplitude per bin
  ControlKind kind = ControlKind::Relative;
  double T1 = 0.0;
  double T2 = 0.0;
  double cond_K_T1 = 0.0;
  double E0 = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Normalize and rotate so the first component with |v_i| > tol is real positive.
inline void phase_fix(Eigen::Ref<CVector> v) {
  const double n = v.norm();
  if (n == 0.0) return;
  v /= n;
  const double tol = 1e-12;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

inline bool lex_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

/// Ascending by lambda; runs of equal lambda (1e-12 relative) ordered lexicographically by field.
inline void sort_solutions(std::vector<ControlSolution>& sols) {
  std::stable_sort(sols.begin(), sols.end(), [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
  double scale = 0.0;
  for (const auto& s : sols) scale = std::max(scale, std::abs(s.lambda));
  std::size_t i = 0;
  while (i < sols.size()) {
    std::size_t j = i + 1;
    while (j < sols.size() && sols[j].lambda - sols[i].lambda <= 1e-12 * scale) ++j;
    std::sort(sols.begin() + static_cast<std::ptrdiff_t>(i), sols.begin() + static_cast<std::ptrdiff_t>(j),
              [](const auto& x, const auto& y) { return lex_less(x.field, y.field); });
    i = j;
  }
}

inline double hermitian_residual(const CMatrix& K) {
  const double n = K.norm();
  return n == 0.0 ? 0.0 : (K - K.adjoint()).norm() / n;
}

}  // namespace detail

/// lambda_max / lambda_min of a Hermitian matrix; +inf unless positive definite.
inline double hermitian_condition(const CMatrix& K) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(K, Eigen::EigenvaluesOnly);
  const auto& w = es.eigenvalues();
  if (!(w(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return w(w.size() - 1) / w(0);
}

/// Analytic spectrum of a rank-1 kernel K = v v^dagger: N-1 null fields with
/// lambda = 0 and one field along v with lambda = trace K. Fields carry norm sqrt(2 pi E0).
inline std::vector<ControlSolution> absolute_control(const KernelMatrices& km, double E0) {
  const CMatrix& K = km.K;
  const auto n = K.rows();
  if (n < 1 || K.cols() != n) throw ValidationError("kernel must be square and non-empty", "K");
  if (!(E0 > 0.0) || !std::isfinite(E0)) throw ValidationError("pulse energy must be positive", "E0");
  if (detail::hermitian_residual(K) > 1e-12) throw ValidationError("kernel is not Hermitian", "K");
  const double trace = K.diagonal().real().sum();
  if (!(trace > 0.0)) throw ValidationError("kernel has zero trace", "K");
  if (n > 1) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(K, Eigen::EigenvaluesOnly);
    const double second = es.eigenvalues()(n - 2);
    if (second > 1e-8 * trace) {
      throw ValidationError("kernel is not rank-1 (second eigenvalue " + std::to_string(second / trace) +
                                " of the trace); use relative control",
                            "K");
    }
  }

  Eigen::Index j = 0;
  K.diagonal().real().maxCoeff(&j);
  CVector v = K.col(j);
  detail::phase_fix(v);

  // Columns 1..n-1 of the Householder Q of v are an orthonormal basis of v's complement.
  const CMatrix vm = v;
  Eigen::HouseholderQR<CMatrix> qr(vm);
  const CMatrix Q = qr.householderQ() * CMatrix::Identity(n, n);

  const double scale = std::sqrt(2.0 * kPi * E0);
  const double cond = std::numeric_limits<double>::infinity();
  std::vector<ControlSolution> sols;
  for (Eigen::Index c = 1; c < n; ++c) {
    CVector u = Q.col(c);
    detail::phase_fix(u);
    sols.push_back({0.0, scale * u, ControlKind::Absolute, km.t, km.t, n == 1 ? 1.0 : cond, E0});
  }
  sols.push_back({trace, scale * v, ControlKind::Absolute, km.t, km.t, n == 1 ? 1.0 : cond, E0});
  detail::sort_solutions(sols);
  return sols;
}

/// Eigenpairs of the Hermitian-definite pair (K2, K1) via Cholesky of K1.
inline std::vector<ControlSolution> relative_control_pair(const CMatrix& K1, const CMatrix& K2,
                                                          double cond_cap = kDefaultConditionCap) {
  const auto n = K1.rows();
  if (n < 1 || K1.cols() != n || K2.rows() != n || K2.cols() != n) throw ValidationError("kernels must be square and equal-sized", "K");
  if (detail::hermitian_residual(K1) > 1e-12 || detail::hermitian_residual(K2) > 1e-12) {
    throw ValidationError("kernel is not Hermitian", "K");
  }
  const double cond = hermitian_condition(K1);
  if (!(cond <= cond_cap)) throw IllConditionedError("K(T1)", cond, cond_cap);

  Eigen::LLT<CMatrix> llt(K1);
  if (llt.info() != Eigen::Success) throw IllConditionedError("K(T1) Cholesky factorization", cond, cond_cap);
  const auto L = llt.matrixL();
  // C = L^-1 K2 L^-dagger
  CMatrix C = L.solve(K2);
  C = L.solve(C.adjoint()).eval();
  C = 0.5 * (C + C.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const CMatrix X = llt.matrixU().solve(es.eigenvectors());

  std::vector<ControlSolution> sols;
  sols.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = es.eigenvalues()(i);
    if (!(lam > 0.0)) throw NumericalError("non-positive ratio eigenvalue " + std::to_string(lam) + "; K(T2) is singular");
    CVector x = X.col(i);
    detail::phase_fix(x);
    sols.push_back({lam, x, ControlKind::Relative, 0.0, 0.0, cond, std::numeric_limits<double>::quiet_NaN()});
  }
  detail::sort_solutions(sols);
  return sols;
}

/// Relative control on binned kernels at T1 < T2.
inline std::vector<ControlSolution> relative_control(const BinnedSystem& b, double T1, double T2,
                                                     double cond_cap = kDefaultConditionCap, double t_over = 0.0) {
  if (!(std::isfinite(T1) && std::isfinite(T2) && T2 > T1)) throw ValidationError("T2 must exceed T1", "T2");
  if (T1 < t_over) throw ValidationError("T1 must be at least t_over (" + std::to_string(t_over) + " fs)", "T1");
  auto sols = relative_control_pair(build_Me(b, T1).K, build_Me(b, T2).K, cond_cap);
  for (auto& s : sols) {
    s.T1 = T1;
    s.T2 = T2;
  }
  return sols;
}

/// Multiplies the field by a nonzero factor; lambda is unchanged.
inline ControlSolution scale_solution(ControlSolution sol, cplx factor) {
  if (factor == cplx{} || !std::isfinite(factor.real()) || !std::isfinite(factor.imag())) {
    throw ValidationError("scale factor must be nonzero and finite", "scale");
  }
  sol.field *= factor;
  return sol;
}

}  // namespace resctl
