#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Core>

namespace resctl {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Reduced Planck constant in eV*fs (CODATA 2018).
inline constexpr double kHbar = 0.6582119569;

inline constexpr double kPi = 3.14159265358979323846;

/// A closed energy interval [lo, hi] in eV.
struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double e) const { return e >= lo && e <= hi; }
  friend bool operator==(const EnergyWindow&, const EnergyWindow&) = default;
};

}  // namespace resctl
