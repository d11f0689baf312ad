#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "helpers.hpp"
#include "resctl/dynamics.hpp"

using namespace resctl;

TEST(Tau, UnityAtTimeZero) {
  const auto s = generate_synthetic(fixtures::spaced_params(3, 64, {4.8, 4.9}, 1.0, 1));
  const auto tf = tau(s, 0.0);
  for (auto z : tf.tau) EXPECT_EQ(z, cplx(1.0));
  EXPECT_TRUE(tf.valid);
}

TEST(Tau, SincZeroAndModulusBound) {
  auto s = generate_synthetic(fixtures::spaced_params(2, 32, {4.8, 4.9}, 1.0, 1));
  const double t = 2.0 * kPi * s.hbar / s.Delta_alpha(0);
  const auto tf = tau(s, t);
  EXPECT_LT(std::abs(tf.tau(0)), 1e-15);
  EXPECT_FALSE(tf.valid);
  for (double tt : {-500.0, -3.0, 0.5, 42.0, 900.0}) {
    EXPECT_LE(tau(s, tt).tau.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Tau, ValidityFlagThreshold) {
  const auto s = generate_synthetic(fixtures::spaced_params(2, 32, {4.8, 4.9}, 1.0, 1));
  const double limit = 0.5 * 2.0 * s.hbar / s.Delta_alpha(0);
  EXPECT_TRUE(tau(s, 0.99 * limit).valid);
  EXPECT_FALSE(tau(s, 1.01 * limit).valid);
  EXPECT_FALSE(tau(s, -1.01 * limit).valid);
}

TEST(Tau, BinnedIsMemberMean) {
  const auto s = generate_synthetic(fixtures::spaced_params(2, 30, {4.8, 4.9}, 1.0, 1));
  const auto b = bin_system(s, {s.grid_lo(), s.grid_hi()}, 10);
  const double t = 37.5;
  const auto tb = tau(b, t);
  for (Eigen::Index A = 0; A < 10; ++A) {
    ASSERT_EQ(b.members[A].size(), 3u);
    cplx mean{};
    for (auto a : b.members[A]) {
      const double x = s.Delta_alpha(a) * t / (2.0 * s.hbar);
      mean += std::exp(cplx{0.0, -s.E_alpha(a) * t / s.hbar}) * std::sin(x) / x;
    }
    mean /= 3.0;
    EXPECT_LT(std::abs(tb.tau(A) - mean), 1e-15);
  }
}

TEST(Mc, IdentityAtTimeZeroForOrthonormalColumns) {
  const auto s = generate_synthetic(fixtures::disjoint_params(4, 40, 3));
  const auto k = build_Mc(s, 0.0);
  EXPECT_LT((k.M - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mc, DisjointSupportsStayDiagonal) {
  const auto s = generate_synthetic(fixtures::disjoint_params(4, 40, 3));
  for (double t : {-20.0, 5.0, 80.0, 300.0}) {
    const auto k = build_Mc(s, t);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j) {
          EXPECT_EQ(std::abs(k.M(i, j)), 0.0);
        }
      }
    }
  }
}

TEST(Mc, MatchesTripleSum) {
  const auto s = generate_synthetic(fixtures::spaced_params(2, 80, {4.8, 4.9}, 2.5, 4));
  const double t = 63.0;
  const auto k = build_Mc(s, t);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx acc{};
      for (Eigen::Index a = 0; a < s.n_alpha(); ++a) {
        const double x = s.Delta_alpha(a) * t / (2.0 * s.hbar);
        acc += std::conj(s.R(a, i)) * s.R(a, j) * std::exp(cplx{0.0, -s.E_alpha(a) * t / s.hbar}) * (std::sin(x) / x);
      }
      EXPECT_LT(std::abs(k.M(i, j) - acc), 1e-14);
    }
  }
  cplx kk{};
  for (int r = 0; r < 2; ++r) kk += std::conj(k.M(r, 0)) * k.M(r, 1);
  EXPECT_LT(std::abs(k.K(0, 1) - kk), 1e-15);
}

TEST(Me, UnitDipolesAtTimeZeroGiveQ) {
  const auto s = generate_synthetic(fixtures::spaced_params(3, 96, {4.8, 4.96}, 2.0, 5));
  auto b = bin_system(s, {s.grid_lo(), s.grid_hi()}, 12);
  b.mu_A.setOnes();
  const auto k = build_Me(b, 0.0);
  EXPECT_LT((k.K - b.Q()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Me, SingleResonanceKernelIsRankOne) {
  const auto s = generate_synthetic(fixtures::spaced_params(1, 64, {4.8, 4.96}, 0.5, 5));
  const auto b = bin_system(s, {s.grid_lo(), s.grid_hi()}, 16);
  const auto k = build_Me(b, 120.0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(k.K);
  const auto& w = es.eigenvalues();
  EXPECT_LT(std::abs(w(w.size() - 2)), 1e-12 * w(w.size() - 1));
}

TEST(Me, HermitianPsdAtRandomTimes) {
  const auto s = generate_synthetic(fixtures::well_posed_params(3.0, 2));
  const auto b = bin_system(s, {s.grid_lo(), s.grid_hi()}, 16);
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> ud(-200.0, 400.0);
  for (int i = 0; i < 10; ++i) {
    const auto k = build_Me(b, ud(eng));
    const double n = k.K.norm();
    EXPECT_LE((k.K - k.K.adjoint()).norm(), 1e-12 * n);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(k.K);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * n);
  }
}

namespace {

struct Driven {
  std::shared_ptr<const ResonanceSystem> sys;
  BinnedSystem b;
  ShapedField f;
};

Driven driven(double alpha) {
  Driven d;
  d.sys = fixtures::make_shared_system(fixtures::well_posed_params(3.0, 9));
  d.b = bin_system(d.sys, {d.sys->grid_lo(), d.sys->grid_hi()}, 16);
  const RVector grid = d.b.omega_grid();
  d.f = solve_d(uniform_basis(grid, alpha), grid, CVector::Ones(16));
  return d;
}

}  // namespace

TEST(Population, ZeroFieldAndCausality) {
  auto d = driven(30.0);
  EXPECT_GT(population(d.f, d.b, 200.0), 0.0);
  EXPECT_LT(population(d.f, d.b, -3.0 * d.f.basis.t_over), 1e-20);
  d.f.d.setZero();
  for (double t : {-100.0, 0.0, 160.0}) EXPECT_EQ(population(d.f, d.b, t), 0.0);
}

TEST(Population, EqualsQuadraticFormThroughD) {
  const auto d = driven(30.0);
  for (double t : {-40.0, 60.0, 200.0}) {
    const CMatrix B = basis_matrix(d.f.basis, d.f.omega_grid, t < d.f.basis.t_over ? std::optional<double>(t) : std::nullopt);
    const CMatrix K = build_Me(d.b, t).K;
    const double want = (d.f.d.adjoint() * B.adjoint() * K * B * d.f.d)(0).real();
    EXPECT_NEAR(population(d.f, d.b, t), want, 1e-12 * want);
  }
}

TEST(Population, TraceIsScheduleIndependent) {
  const auto d = driven(30.0);
  const RVector ts = RVector::LinSpaced(41, -150.0, 250.0);
  const auto one = population_trace(d.f, d.b, ts, 1);
  const auto four = population_trace(d.f, d.b, ts, 4);
  EXPECT_TRUE(one.P_S2 == four.P_S2);
  EXPECT_TRUE(one.P_S1_remainder == four.P_S1_remainder);
  EXPECT_TRUE(one.envelope == four.envelope);
}

TEST(PopulationC, ZeroAndIsolatedDecay) {
  const auto s = generate_synthetic(fixtures::disjoint_params(3, 40, 8));
  EXPECT_EQ(population_c(CVector::Zero(3), s, 50.0), 0.0);
  CVector c = CVector::Zero(3);
  c(1) = 1.0;
  EXPECT_NEAR(population_c(c, s, 0.0), 1.0, 1e-12);
  for (double t : {10.0, 100.0, 400.0}) {
    const double want = std::norm(build_Mc(s, t).M(1, 1));
    EXPECT_NEAR(population_c(c, s, t), want, 1e-14);
  }
}

TEST(PopulationC, NormAtTimeZeroForOrthonormalResonances) {
  const auto s = generate_synthetic(fixtures::disjoint_params(4, 30, 2));
  CVector c(4);
  c << cplx{1, 2}, cplx{0, -1}, cplx{0.5, 0.5}, cplx{-2, 0};
  EXPECT_NEAR(population_c(c, s, 0.0), c.squaredNorm(), 1e-12 * c.squaredNorm());
}

// Each resonance confined to one bin makes K diagonal, so phases cannot matter.
TEST(Population, PhaseInvarianceForDiagonalKernels) {
  const auto s = std::make_shared<const ResonanceSystem>(generate_synthetic(fixtures::disjoint_params(6, 20, 4)));
  const auto b = bin_system(s, {s->grid_lo(), s->grid_hi()}, 6);
  for (double t : {150.0, 250.0}) {
    const CMatrix K = build_Me(b, t).K;
    EXPECT_EQ((K - CMatrix(K.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
  }
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  CVector eps(6);
  for (auto& z : eps) z = std::polar(1.0 + ph(eng) * 0.1, ph(eng));
  for (double t : {150.0, 250.0}) {
    const double p0 = population_spectral(eps, b, t);
    for (int rep = 0; rep < 5; ++rep) {
      CVector e2 = eps;
      for (auto& z : e2) z *= std::polar(1.0, ph(eng));
      EXPECT_NEAR(population_spectral(e2, b, t), p0, 1e-12 * p0);
    }
  }
}

TEST(Population, RemainderVanishesAfterDeltaPulseForOrthonormalColumns) {
  const auto s = std::make_shared<const ResonanceSystem>(generate_synthetic(fixtures::disjoint_params(3, 20, 4)));
  const auto b = bin_system(s, {s->grid_lo(), s->grid_hi()}, s->n_alpha());
  const CVector eps = CVector::Ones(b.n_bins());
  EXPECT_NEAR(excited_norm(eps, b), population_spectral(eps, b, 0.0), 1e-12 * excited_norm(eps, b));
}

TEST(Population, DeltaPulseMatchesCControlledUpToScale) {
  const auto s = std::make_shared<const ResonanceSystem>(generate_synthetic(fixtures::well_posed_params(3.0, 6)));
  const auto b = bin_system(s, {s->grid_lo(), s->grid_hi()}, s->n_alpha());
  const double wc = 0.5 * (b.omega_grid()(0) + b.omega_grid()(b.n_bins() - 1));
  const auto basis = make_basis({{1.0, 0.1, wc}});
  const ShapedField f{basis, CVector::Ones(1), b.omega_grid()};
  const CVector c = doorway_superposition(*s);
  const RVector ts = RVector::LinSpaced(30, basis.t_over, 200.0);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < ts.size(); ++i) {
    const double pl = population(f, b, ts(i));
    const double pc = population_c(c, *s, ts(i));
    if (i == 0) scale = pl / pc;
    EXPECT_LT(std::abs(pl - scale * pc), 1e-3 * pl) << "t=" << ts(i);
  }
}
