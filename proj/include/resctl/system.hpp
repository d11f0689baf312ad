#pragma once

// Resonance data model: coarse-grained states |abar>, their overlaps with the
// Q-space resonances |kappa>, the seeded synthetic generator, and the second
// level |Abar> binning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "resctl/errors.hpp"
#include "resctl/types.hpp"

namespace resctl {

/// Material-system input. R(alpha, kappa) = <abar|kappa>, rows follow E_alpha.
struct ResonanceSystem {
  RVector E_alpha;      // eV, strictly increasing
  RVector Delta_alpha;  // eV, > 0
  CMatrix R;            // N_alpha x N_Q
  CVector mu_kappa;     // <kappa|mu|g>
  double E_g = 0.0;     // eV
  double hbar = kHbar;  // eV*fs

  Eigen::Index n_alpha() const { return E_alpha.size(); }
  Eigen::Index n_q() const { return R.cols(); }

  /// Lower/upper edge of the coarse-grained cells.
  double grid_lo() const { return E_alpha(0) - 0.5 * Delta_alpha(0); }
  double grid_hi() const { return E_alpha(n_alpha() - 1) + 0.5 * Delta_alpha(n_alpha() - 1); }

  /// Sum_alpha |R(alpha, kappa)|^2 for each column.
  RVector column_norms() const { return R.cwiseAbs2().colwise().sum().transpose(); }

  friend bool operator==(const ResonanceSystem& a, const ResonanceSystem& b) {
    return a.E_alpha == b.E_alpha && a.Delta_alpha == b.Delta_alpha && a.R == b.R && a.mu_kappa == b.mu_kappa &&
           a.E_g == b.E_g && a.hbar == b.hbar;
  }
};

namespace detail {

inline bool all_finite(const auto& m) { return m.allFinite(); }

}  // namespace detail

/// Throws ValidationError naming the first broken invariant.
inline void validate(const ResonanceSystem& sys) {
  const auto na = sys.n_alpha();
  const auto nq = sys.n_q();
  if (na < 1) throw ValidationError("no coarse-grained states", "E_alpha");
  if (nq < 1) throw ValidationError("no resonances", "R");
  if (na < nq) throw ValidationError("N_alpha must be >= N_Q", "R");
  if (sys.Delta_alpha.size() != na) throw ValidationError("length differs from E_alpha", "Delta_alpha");
  if (sys.R.rows() != na) throw ValidationError("row count differs from E_alpha", "R");
  if (sys.mu_kappa.size() != nq) throw ValidationError("length differs from column count of R", "mu_kappa");
  if (!detail::all_finite(sys.E_alpha)) throw ValidationError("non-finite value", "E_alpha");
  if (!detail::all_finite(sys.Delta_alpha)) throw ValidationError("non-finite value", "Delta_alpha");
  if (!detail::all_finite(sys.R)) throw ValidationError("non-finite value", "R");
  if (!detail::all_finite(sys.mu_kappa)) throw ValidationError("non-finite value", "mu_kappa");
  if (!std::isfinite(sys.E_g)) throw ValidationError("non-finite value", "E_g");
  if (!(std::isfinite(sys.hbar) && sys.hbar > 0.0)) throw ValidationError("must be positive and finite", "hbar");
  for (Eigen::Index a = 1; a < na; ++a) {
    if (!(sys.E_alpha(a) > sys.E_alpha(a - 1))) throw ValidationError("must be strictly increasing", "E_alpha");
  }
  if ((sys.Delta_alpha.array() <= 0.0).any()) throw ValidationError("bin widths must be positive", "Delta_alpha");
  const RVector norms = sys.column_norms();
  for (Eigen::Index k = 0; k < nq; ++k) {
    if (!(norms(k) > 0.0)) throw ValidationError("column " + std::to_string(k) + " has no nonzero entry", "R");
  }
}

/// Parameters of the seeded Lorentzian-profile generator.
struct GeneratorParams {
  Eigen::Index n_alpha = 256;
  EnergyWindow window{4.80, 4.96};
  std::vector<double> widths;     // Gamma_kappa, eV
  std::vector<double> centers;    // E_kappa, eV
  std::vector<double> dipoles;    // |<kappa|mu|g>|
  std::uint64_t seed = 1;
  /// Support of each column is |E - E_kappa| <= tail_cutoff * Gamma_kappa; 0 keeps the full tail.
  double tail_cutoff = 10.0;
  double E_g = 0.0;

  Eigen::Index n_q() const { return static_cast<Eigen::Index>(centers.size()); }
};

namespace detail {

// Uniform [0, 1) from the raw 64-bit engine output; identical on every platform.
inline double unit_uniform(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Synthetic system: uniform E_alpha grid over the window, |R(alpha,kappa)|^2 a
/// Lorentzian of width Gamma_kappa around E_kappa, column-normalized, with
/// seeded uniform random phases.
inline ResonanceSystem generate_synthetic(const GeneratorParams& p) {
  const auto nq = p.n_q();
  if (!(p.window.hi > p.window.lo) || !std::isfinite(p.window.lo) || !std::isfinite(p.window.hi)) {
    throw ValidationError("degenerate energy window", "window");
  }
  if (p.n_alpha < 1) throw ValidationError("must be positive", "n_alpha");
  if (nq < 1) throw ValidationError("at least one resonance required", "centers");
  if (nq > p.n_alpha) throw ValidationError("n_q must not exceed n_alpha", "n_q");
  if (static_cast<Eigen::Index>(p.widths.size()) != nq) throw ValidationError("length must equal n_q", "widths");
  if (static_cast<Eigen::Index>(p.dipoles.size()) != nq) throw ValidationError("length must equal n_q", "dipoles");
  for (double g : p.widths) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("every width must be positive", "widths");
  }
  for (double c : p.centers) {
    if (!p.window.contains(c)) throw ValidationError("center outside the energy window", "centers");
  }
  if (!(p.tail_cutoff >= 0.0)) throw ValidationError("must be >= 0", "tail_cutoff");

  ResonanceSystem sys;
  const double step = p.window.width() / static_cast<double>(p.n_alpha);
  sys.E_alpha.resize(p.n_alpha);
  for (Eigen::Index a = 0; a < p.n_alpha; ++a) sys.E_alpha(a) = p.window.lo + (static_cast<double>(a) + 0.5) * step;
  sys.Delta_alpha = RVector::Constant(p.n_alpha, step);
  sys.E_g = p.E_g;
  sys.mu_kappa.resize(nq);
  sys.R.resize(p.n_alpha, nq);

  std::mt19937_64 eng(p.seed);
  for (Eigen::Index k = 0; k < nq; ++k) {
    const double gamma = p.widths[k];
    const double center = p.centers[k];
    Eigen::Index nearest = 0;
    for (Eigen::Index a = 1; a < p.n_alpha; ++a) {
      if (std::abs(sys.E_alpha(a) - center) < std::abs(sys.E_alpha(nearest) - center)) nearest = a;
    }
    RVector amp(p.n_alpha);
    for (Eigen::Index a = 0; a < p.n_alpha; ++a) {
      const double de = sys.E_alpha(a) - center;
      const bool inside = p.tail_cutoff == 0.0 || std::abs(de) <= p.tail_cutoff * gamma || a == nearest;
      const double lorentz = (gamma / (2.0 * kPi)) / (de * de + 0.25 * gamma * gamma);
      amp(a) = inside ? std::sqrt(lorentz * step) : 0.0;
    }
    amp /= amp.norm();
    for (Eigen::Index a = 0; a < p.n_alpha; ++a) {
      // one draw per entry, supported or not, so the phase stream does not depend on widths
      const double phase = 2.0 * kPi * detail::unit_uniform(eng);
      sys.R(a, k) = amp(a) == 0.0 ? cplx{} : std::polar(amp(a), phase);
    }
    sys.mu_kappa(k) = p.dipoles[k];
  }
  return sys;
}

/// The |Abar> reduction of a ResonanceSystem over [E_L, E_H] with N_A equal bins.
struct BinnedSystem {
  RVector bin_edges;                                 // N_A + 1
  RVector E_A;                                       // bin centers, eV
  std::vector<std::vector<Eigen::Index>> members;    // alpha indices in each bin
  CMatrix R_A;                                       // N_A x N_Q, <Abar|kappa>
  CVector mu_A;                                      // (i/hbar) <Abar|mu|g>
  std::shared_ptr<const ResonanceSystem> parent;

  Eigen::Index n_bins() const { return E_A.size(); }
  EnergyWindow window() const { return {bin_edges(0), bin_edges(bin_edges.size() - 1)}; }

  /// omega_{A,g} = (E_A - E_g)/hbar in rad/fs.
  RVector omega_grid() const { return (E_A.array() - parent->E_g) / parent->hbar; }

  /// Q^A = R_A R_A^dagger.
  CMatrix Q() const { return R_A * R_A.adjoint(); }
};

/// (i/hbar) sum_kappa' <abar|kappa'> <kappa'|mu|g> for every coarse-grained state.
inline CVector doorway_dipoles(const ResonanceSystem& sys) {
  return cplx{0.0, 1.0 / sys.hbar} * (sys.R * sys.mu_kappa);
}

inline BinnedSystem bin_system(std::shared_ptr<const ResonanceSystem> sys, EnergyWindow window, Eigen::Index n_A) {
  if (!sys) throw ValidationError("null system", "system");
  if (n_A < 1) throw ValidationError("must be >= 1", "N_A");
  if (!(window.hi > window.lo)) throw ValidationError("degenerate window", "window");
  const double tol = 1e-9 * std::max(1.0, std::abs(sys->grid_hi()));
  if (window.lo < sys->grid_lo() - tol || window.hi > sys->grid_hi() + tol) {
    throw ValidationError("window outside the coarse-grained grid", "window");
  }

  BinnedSystem out;
  out.parent = sys;
  out.bin_edges.resize(n_A + 1);
  for (Eigen::Index i = 0; i <= n_A; ++i) {
    out.bin_edges(i) = window.lo + window.width() * static_cast<double>(i) / static_cast<double>(n_A);
  }
  out.bin_edges(n_A) = window.hi;
  out.E_A = 0.5 * (out.bin_edges.head(n_A) + out.bin_edges.tail(n_A));
  out.members.assign(static_cast<std::size_t>(n_A), {});
  for (Eigen::Index a = 0; a < sys->n_alpha(); ++a) {
    const double e = sys->E_alpha(a);
    if (e < window.lo || e > window.hi) continue;
    // half-open bins [lo, hi), last one closed
    auto it = std::upper_bound(out.bin_edges.data(), out.bin_edges.data() + n_A + 1, e);
    auto bin = static_cast<Eigen::Index>(it - out.bin_edges.data()) - 1;
    bin = std::clamp<Eigen::Index>(bin, 0, n_A - 1);
    out.members[static_cast<std::size_t>(bin)].push_back(a);
  }

  const CVector mu_alpha = doorway_dipoles(*sys);
  out.R_A = CMatrix::Zero(n_A, sys->n_q());
  out.mu_A = CVector::Zero(n_A);
  for (Eigen::Index A = 0; A < n_A; ++A) {
    const auto& m = out.members[static_cast<std::size_t>(A)];
    if (m.empty()) throw ValidationError("bin " + std::to_string(A) + " contains no coarse-grained state", "N_A");
    for (auto a : m) {
      out.R_A.row(A) += sys->R.row(a);
      out.mu_A(A) += mu_alpha(a);
    }
  }
  return out;
}

inline BinnedSystem bin_system(const ResonanceSystem& sys, EnergyWindow window, Eigen::Index n_A) {
  return bin_system(std::make_shared<const ResonanceSystem>(sys), window, n_A);
}

}  // namespace resctl
