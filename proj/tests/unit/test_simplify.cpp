#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "resctl/simplify.hpp"

using namespace resctl;

namespace {

struct Optimized {
  std::shared_ptr<const ResonanceSystem> sys;
  BinnedSystem b;
  GaussianBasis basis;
  std::vector<ControlSolution> sols;
  ShapedField f_min, f_max;
};

const Optimized& optimized() {
  static const Optimized o = [] {
    Optimized o;
    o.sys = fixtures::make_shared_system(fixtures::well_posed_params(3.0, 1));
    o.b = bin_system(o.sys, {o.sys->grid_lo(), o.sys->grid_hi()}, 16);
    o.basis = uniform_basis(o.b.omega_grid(), 30.0);
    o.sols = relative_control(o.b, 150.0, 250.0);
    o.f_min = solve_d(o.basis, o.b.omega_grid(), o.sols.front().field);
    o.f_max = solve_d(o.basis, o.b.omega_grid(), o.sols.back().field);
    return o;
  }();
  return o;
}

}  // namespace

TEST(LocalAverage, FullResolutionIsIdentity) {
  const auto& o = optimized();
  const auto f = local_average(o.f_max, 16);
  EXPECT_TRUE(f.d == o.f_max.d);
}

TEST(LocalAverage, ConstantFieldUnchanged) {
  const auto& o = optimized();
  const CVector c = CVector::Constant(16, std::polar(0.7, 2.0));
  const auto f = solve_d(o.basis, o.b.omega_grid(), c);
  EXPECT_LT((spectral_values(local_average(f, 4)) - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LocalAverage, CircularPhaseMeanAcrossBranchCut) {
  const RVector grid = RVector::LinSpaced(2, 7.30, 7.32);
  const auto basis = uniform_basis(grid, 30.0);
  CVector v(2);
  v << std::polar(1.0, kPi - 0.1), std::polar(3.0, -kPi + 0.1);
  const auto avg = local_average(solve_d(basis, grid, v), 1);
  const CVector got = spectral_values(avg);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(std::abs(got(i)), 2.0, 1e-9);
    EXPECT_NEAR(std::abs(std::arg(got(i))), kPi, 1e-9);
  }
}

TEST(LocalAverage, NonDivisorRejected) {
  EXPECT_THROW(local_average(optimized().f_max, 5), ValidationError);
  EXPECT_THROW(local_average(optimized().f_max, 0), ValidationError);
}

TEST(LocalAverage, HalvingCollapsesControl) {
  const auto& o = optimized();
  const double span = o.sols.back().lambda - o.sols.front().lambda;
  const double rmin = achieved_ratio(local_average(o.f_min, 8), o.b, 150.0, 250.0);
  const double rmax = achieved_ratio(local_average(o.f_max, 8), o.b, 150.0, 250.0);
  EXPECT_TRUE(std::isfinite(rmin) && std::isfinite(rmax));
  EXPECT_LT(std::abs(rmax - rmin), span);
}

TEST(SmoothExpand, FullResolutionReproducesField) {
  const auto& o = optimized();
  const auto f = smooth_expand(o.f_max, 16);
  EXPECT_LT((spectral_values(f) - spectral_values(o.f_max)).cwiseAbs().maxCoeff(), 1e-9 * o.f_max.d.cwiseAbs().maxCoeff());
}

TEST(SmoothExpand, ConstantStepGivesSmoothField) {
  const auto& o = optimized();
  const CVector c = CVector::Constant(16, cplx{0.4, -0.2});
  const auto f = smooth_expand(solve_d(o.basis, o.b.omega_grid(), c), 4);
  EXPECT_EQ(f.basis.size(), 4);
  EXPECT_EQ(f.omega_grid.size(), 16);
  const CVector v = spectral_values(f);
  EXPECT_TRUE(v.allFinite());
  EXPECT_GT(v.cwiseAbs().minCoeff(), 0.0);
}

TEST(Truncate, IdentityAndSingleBin) {
  const auto& o = optimized();
  EXPECT_TRUE(truncate_amplitudes(o.f_max, 16).d == o.f_max.d);
  const CVector full = spectral_values(o.f_max);
  Eigen::Index top = 0;
  full.cwiseAbs().maxCoeff(&top);
  const CVector one = spectral_values(truncate_amplitudes(o.f_max, 1));
  for (Eigen::Index i = 0; i < 16; ++i) {
    if (i == top) {
      EXPECT_LT(std::abs(one(i) - full(i)), 1e-9 * std::abs(full(i)));
    } else {
      EXPECT_LT(std::abs(one(i)), 1e-9 * std::abs(full(top)));
    }
  }
}

TEST(Truncate, IdempotentAndPhasePreserving) {
  const auto& o = optimized();
  const auto once = truncate_amplitudes(o.f_min, 10);
  const auto twice = truncate_amplitudes(once, 10);
  const CVector a = spectral_values(once);
  const CVector b = spectral_values(twice);
  const CVector full = spectral_values(o.f_min);
  const double scale = full.cwiseAbs().maxCoeff();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9 * scale);
  for (Eigen::Index i = 0; i < 16; ++i) {
    if (std::abs(a(i)) > 1e-6 * scale) {
      EXPECT_NEAR(std::arg(a(i)), std::arg(full(i)), 1e-8);
    }
  }
}

TEST(Truncate, TiesBreakTowardLowerIndex) {
  const RVector grid = RVector::LinSpaced(4, 7.30, 7.36);
  const auto basis = uniform_basis(grid, 30.0);
  CVector v(4);
  v << 1.0, cplx{0.0, 2.0}, -2.0, 0.5;
  const auto f = solve_d(basis, grid, v);
  const auto kept = spectral_values(truncate_amplitudes(f, 1));
  EXPECT_GT(std::abs(kept(1)), 1.0);
  EXPECT_LT(std::abs(kept(2)), 1e-6);
}

TEST(RetentionSweep, FullRowMatchesEigenvalues) {
  const auto& o = optimized();
  const auto rows = retention_sweep(o.b, o.f_min, o.f_max, {16, 12, 8}, 150.0, 250.0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].achieved_min, o.sols.front().lambda, 1e-6 * o.sols.front().lambda);
  EXPECT_NEAR(rows[0].achieved_max, o.sols.back().lambda, 1e-6 * o.sols.back().lambda);
  EXPECT_NEAR(rows[0].fresh_min, o.sols.front().lambda, 1e-12 * o.sols.front().lambda);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.achieved_min) && std::isfinite(r.achieved_max));
    EXPECT_TRUE(std::isfinite(r.fresh_min) && std::isfinite(r.fresh_max));
  }
  const auto par = retention_sweep(o.b, o.f_min, o.f_max, {16, 12, 8}, 150.0, 250.0, kDefaultConditionCap, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].achieved_max, par[i].achieved_max);
}
