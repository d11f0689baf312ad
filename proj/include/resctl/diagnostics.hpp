#pragma once

// Non-diagonality measures and the overlap/controllability report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "resctl/control.hpp"

namespace resctl {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log det of a Hermitian PSD matrix, -inf if it is not positive definite.
inline double log_det_hpd(const CMatrix& K) {
  Eigen::LLT<CMatrix> llt(K);
  if (llt.info() != Eigen::Success) return kNegInf;
  const auto d = llt.matrixLLT().diagonal().real();
  if ((d.array() <= 0.0).any()) return kNegInf;
  return 2.0 * d.array().log().sum();
}

/// Complex log det through LU pivots; the sign of the permutation adds i*pi.
inline cplx log_det_general(const CMatrix& M) {
  Eigen::PartialPivLU<CMatrix> lu(M);
  cplx acc{};
  const auto& U = lu.matrixLU();
  for (Eigen::Index i = 0; i < U.rows(); ++i) acc += std::log(U(i, i));
  if (lu.permutationP().determinant() < 0) acc += cplx{0.0, kPi};
  return acc;
}

inline void check_hadamard_input(const CMatrix& K) {
  if (K.rows() != K.cols() || K.rows() == 0) throw ValidationError("matrix must be square and non-empty", "K");
  if (hermitian_residual(K) > 1e-12) throw ValidationError("matrix is not Hermitian", "K");
  if ((K.diagonal().real().array() <= 0.0).any()) throw ValidationError("diagonal entries must be positive", "K");
}

}  // namespace detail

/// log(1 + x) - x without cancellation for small x.
inline double log1p_minus(double x) {
  if (std::abs(x) < 1e-4) return x * x * (-0.5 + x * (1.0 / 3.0 - 0.25 * x));
  return x > -1.0 ? std::log1p(x) - x : detail::kNegInf;
}

/// log of det(K) / prod K_ii. With Kn = D^-1/2 K D^-1/2 = I + E (E has zero
/// diagonal, so its eigenvalues sum to 0) this is sum_i [log(1 + e_i) - e_i],
/// which stays strictly negative for any nonzero off-diagonal part.
/// PSD-singular input gives -inf.
inline double log_hadamard(const CMatrix& K) {
  detail::check_hadamard_input(K);
  const RVector s = K.diagonal().real().cwiseSqrt().cwiseInverse();
  CMatrix E = s.asDiagonal() * K * s.asDiagonal();
  E.diagonal().setZero();
  if (E.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(E, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) acc += log1p_minus(es.eigenvalues()(i));
  return std::min(acc, 0.0);
}

inline double log_hadamard(const RMatrix& K) { return log_hadamard(CMatrix(K.cast<cplx>())); }

inline double hadamard(const CMatrix& K) { return std::exp(log_hadamard(K)); }
inline double hadamard(const RMatrix& K) { return std::exp(log_hadamard(K)); }

struct HadamardR {
  double log_H_R = 0.0;
  cplx log_H_C{};
  double log_det_R_ratio = 0.0;  // log det K2 - log det K1
  cplx log_det_R_direct{};       // log det(K1^-1 K2) from LU
  double H_R() const { return std::exp(log_H_R); }
  cplx H_C() const { return std::exp(log_H_C); }
};

/// H_R and H_C of R = K1^-1 K2, all in the log domain.
inline HadamardR hadamard_R(const CMatrix& K1, const CMatrix& K2) {
  detail::check_hadamard_input(K1);
  detail::check_hadamard_input(K2);
  if (K1.rows() != K2.rows()) throw ValidationError("kernels differ in size", "K");
  Eigen::LLT<CMatrix> llt(K1);
  const double ld1 = detail::log_det_hpd(K1);
  if (llt.info() != Eigen::Success || !std::isfinite(ld1)) {
    throw IllConditionedError("K(T1) is singular", hermitian_condition(K1), kDefaultConditionCap);
  }
  const auto n = K1.rows();
  const CMatrix K1inv = llt.solve(CMatrix::Identity(n, n));
  const CMatrix R = llt.solve(K2);

  HadamardR h;
  h.log_det_R_ratio = detail::log_det_hpd(K2) - ld1;
  h.log_det_R_direct = detail::log_det_general(R);
  double log_diag = 0.0;
  cplx log_diag_R{};
  for (Eigen::Index i = 0; i < n; ++i) {
    log_diag += std::log(K1inv(i, i).real()) + std::log(K2(i, i).real());
    log_diag_R += std::log(R(i, i));
  }
  h.log_H_R = h.log_det_R_ratio - log_diag;
  h.log_H_C = h.log_det_R_ratio - log_diag_R;
  return h;
}

/// Omega[k, k'] = sum over E_alpha in the window of |R[alpha, k]| |R[alpha, k']|.
inline RMatrix overlap_matrix(const ResonanceSystem& sys, EnergyWindow window) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index a = 0; a < sys.n_alpha(); ++a) {
    if (window.contains(sys.E_alpha(a))) rows.push_back(a);
  }
  if (rows.empty()) throw ValidationError("no coarse-grained states in the window", "window");
  RMatrix A(static_cast<Eigen::Index>(rows.size()), sys.n_q());
  for (std::size_t i = 0; i < rows.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = sys.R.row(rows[i]).cwiseAbs();
  return A.transpose() * A;
}

/// One row of the overlap/controllability table; H entries are (1/N_A) powers.
struct MeasureReport {
  EnergyWindow window;
  Eigen::Index N_A = 0;
  double H_Omega = 0.0;
  double H_K_T1 = 0.0;
  double H_K_T2 = 0.0;
  double H_R_R = 0.0;
  double abs_H_C_R = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double cond_K_T1 = 0.0;
  bool omega_det_positive = true;  // false flags det(Omega) <= 0
};

inline MeasureReport measure_window(const std::shared_ptr<const ResonanceSystem>& sys, EnergyWindow window, double T1,
                                    double T2, Eigen::Index N_A, double cond_cap = kDefaultConditionCap) {
  const BinnedSystem b = bin_system(sys, window, N_A);
  const RMatrix omega = overlap_matrix(*sys, window);
  const auto k1 = build_Me(b, T1);
  const auto k2 = build_Me(b, T2);
  const auto sols = relative_control_pair(k1.K, k2.K, cond_cap);
  const auto hr = hadamard_R(k1.K, k2.K);
  const double inv = 1.0 / static_cast<double>(N_A);

  MeasureReport r;
  r.window = window;
  r.N_A = N_A;
  const double lho = log_hadamard(omega);
  r.omega_det_positive = std::isfinite(lho);
  r.H_Omega = std::exp(inv * lho);
  r.H_K_T1 = std::exp(inv * log_hadamard(k1.K));
  r.H_K_T2 = std::exp(inv * log_hadamard(k2.K));
  r.H_R_R = std::exp(inv * hr.log_H_R);
  r.abs_H_C_R = std::exp(inv * hr.log_H_C.real());
  r.lambda_min = sols.front().lambda;
  r.lambda_max = sols.back().lambda;
  r.cond_K_T1 = sols.front().cond_K_T1;
  return r;
}

inline std::vector<MeasureReport> correlation_report(const std::shared_ptr<const ResonanceSystem>& sys,
                                                     const std::vector<EnergyWindow>& windows, double T1, double T2,
                                                     Eigen::Index N_A, double cond_cap = kDefaultConditionCap,
                                                     unsigned threads = 1) {
  std::vector<MeasureReport> out(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t i) { out[i] = measure_window(sys, windows[i], T1, T2, N_A, cond_cap); });
  return out;
}

/// Ranks with ties sharing their average rank (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("need two equal-length samples of size >= 2", "samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace resctl
