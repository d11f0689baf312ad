#pragma once

// Faddeeva function W(z) = exp(-z^2) erfc(-iz).
//
// Upper half-plane values come from the Gautschi/Poppe-Wijers scheme: a
// truncated Taylor series around the origin, a Laplace continued fraction far
// from it, and the shifted (h > 0) continued fraction in between. The lower
// half-plane follows from W(z) = 2 exp(-z^2) - W(-z).

#include <cmath>
#include <complex>
#include <limits>

#include "resctl/types.hpp"

namespace resctl {

namespace detail {

// W(x + iy) for y >= 0 and x >= 0. Returns (Re, Im).
inline cplx faddeeva_first_quadrant(double x, double y) {
  constexpr double two_over_sqrt_pi = 1.12837916709551257388;

  const double xs = x / 6.3;
  const double ys = y / 4.4;
  double qrho = xs * xs + ys * ys;

  if (qrho < 0.085264) {
    // Power series of exp(z^2) erf-like sum, then multiply by exp(-z^2).
    const double xquad = x * x - y * y;
    const double yquad = 2.0 * x * y;
    qrho = (1.0 - 0.85 * ys) * std::sqrt(qrho);
    const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
    int j = 2 * n + 1;
    double xsum = 1.0 / j;
    double ysum = 0.0;
    for (int i = n; i >= 1; --i) {
      j -= 2;
      const double xaux = (xsum * xquad - ysum * yquad) / i;
      ysum = (xsum * yquad + ysum * xquad) / i;
      xsum = xaux + 1.0 / j;
    }
    const double u1 = -two_over_sqrt_pi * (xsum * y + ysum * x) + 1.0;
    const double v1 = two_over_sqrt_pi * (xsum * x - ysum * y);
    const double daux = std::exp(-xquad);
    const double u2 = daux * std::cos(yquad);
    const double v2 = -daux * std::sin(yquad);
    return {u1 * u2 - v1 * v2, u1 * v2 + v1 * u2};
  }

  double h = 0.0;
  int kapn = 0;
  int nu = 0;
  if (qrho > 1.0) {
    qrho = std::sqrt(qrho);
    nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
  } else {
    qrho = (1.0 - ys) * std::sqrt(1.0 - qrho);
    h = 1.88 * qrho;
    kapn = static_cast<int>(std::lround(7.0 + 34.0 * qrho));
    nu = static_cast<int>(std::lround(16.0 + 26.0 * qrho));
  }
  const bool shifted = h > 0.0;
  const double h2 = 2.0 * h;
  double qlambda = shifted ? std::pow(h2, kapn) : 0.0;

  double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
  for (int n = nu; n >= 0; --n) {
    const double np1 = n + 1;
    double tx = y + h + np1 * rx;
    const double ty = x - np1 * ry;
    const double c = 0.5 / (tx * tx + ty * ty);
    rx = c * tx;
    ry = c * ty;
    if (shifted && n <= kapn) {
      tx = qlambda + sx;
      sx = rx * tx - ry * sy;
      sy = ry * tx + rx * sy;
      qlambda /= h2;
    }
  }
  double u = two_over_sqrt_pi * (shifted ? sx : rx);
  const double v = two_over_sqrt_pi * (shifted ? sy : ry);
  if (y == 0.0) u = std::exp(-x * x);
  return {u, v};
}

}  // namespace detail

/// Faddeeva function W(z) = exp(-z^2) erfc(-iz).
///
/// Relative accuracy is about 1e-13 wherever the value is representable. In
/// the lower half-plane |W| grows like exp(y^2 - x^2) and overflows to
/// infinity once that exponent passes ~709.
inline cplx faddeeva(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  if (!std::isfinite(x) || !std::isfinite(y)) {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }

  if (y >= 0.0) {
    const cplx w = detail::faddeeva_first_quadrant(std::abs(x), y);
    // W(-x + iy) = conj(W(x + iy))
    return x < 0.0 ? std::conj(w) : w;
  }

  // W(z) = 2 exp(-z^2) - W(-z), with -z in the upper half-plane.
  const cplx wm = faddeeva(-z);
  const double re_exp = y * y - x * x;
  if (re_exp > 709.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  return 2.0 * std::exp(-z * z) - wm;
}

/// erfc for complex arguments, evaluated through W without intermediate overflow
/// when Re(w) >= 0.
inline cplx erfc_complex(cplx w) {
  if (w.real() >= 0.0) {
    // erfc(w) = exp(-w^2) W(iw), Im(iw) = Re(w) >= 0.
    return std::exp(-w * w) * faddeeva(cplx{-w.imag(), w.real()});
  }
  return 2.0 - erfc_complex(-w);
}

}  // namespace resctl
