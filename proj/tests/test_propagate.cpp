#include <gtest/gtest.h>

#include <random>

#include "trscat/propagate.hpp"

using namespace trscat;

namespace {
TruncatedPotential free_potential(double M) { return {PotentialSpec::square_well(0.0), M}; }
}

TEST(Propagate, InitialConditionsNonNodal) {
  const auto s = initial_conditions(NormalizationCase::NonNodal, 0.0);
  EXPECT_EQ(s.u, cplx(1.0));
  EXPECT_EQ(s.du, cplx(0.0));
  EXPECT_EQ(s.v, cplx(0.0));
  EXPECT_EQ(s.dv, cplx(1.0));
  EXPECT_EQ(s.wronskian(), cplx(1.0));
  EXPECT_EQ(s.u_z, cplx(0.0));
  EXPECT_EQ(s.Iuu, cplx(0.0));
}

TEST(Propagate, InitialConditionsNodal) {
  const auto s = initial_conditions(NormalizationCase::Nodal, 0.0);
  EXPECT_EQ(s.u, cplx(0.0));
  EXPECT_EQ(s.du, cplx(1.0));
  EXPECT_EQ(s.v, cplx(-1.0));
  EXPECT_EQ(s.dv, cplx(0.0));
  EXPECT_EQ(s.wronskian(), cplx(1.0));
  EXPECT_EQ(s.u_w, cplx(-1.0));
}

TEST(Propagate, WronskianOneForComplexW) {
  for (auto c : {NormalizationCase::NonNodal, NormalizationCase::Nodal}) {
    const auto s = initial_conditions(c, cplx(0.3, -0.7));
    EXPECT_LT(std::abs(s.wronskian() - 1.0), 1e-15);
  }
}

TEST(Propagate, SingularNormalization) {
  EXPECT_THROW(initial_conditions(NormalizationCase::NonNodal, I), DomainError);
  EXPECT_THROW(initial_conditions(NormalizationCase::Nodal, -I), DomainError);
}

TEST(Propagate, FreeCosineSine) {
  const double M = pi / 2;
  const auto bd = integrate_fundamentals(free_potential(M), Zeta{0.0, 1.0}, NormalizationCase::NonNodal);
  EXPECT_LT(std::abs(bd.plus.u), 1e-9);
  EXPECT_LT(std::abs(bd.plus.du + 1.0), 1e-9);
  EXPECT_LT(std::abs(bd.plus.v - 1.0), 1e-9);
  EXPECT_LT(std::abs(bd.plus.dv), 1e-9);
  EXPECT_LT(std::abs(bd.minus.v + 1.0), 1e-9);
  // int_0^{pi/2} cos^2 = pi/4
  EXPECT_LT(std::abs(bd.Iuu_right() - pi / 4), 1e-9);
  EXPECT_LT(std::abs(bd.Iuu_left() - pi / 4), 1e-9);
}

TEST(Propagate, HarmonicGroundState) {
  const double M = 3.0;
  const TruncatedPotential p(PotentialSpec::harmonic(1.0), M);
  const auto bd = integrate_fundamentals(p, Zeta{0.0, 2.0}, NormalizationCase::NonNodal);
  const double exact = std::exp(-M * M / 2);
  EXPECT_LT(std::abs(bd.plus.u - exact) / exact, 1e-8);
  EXPECT_LT(std::abs(bd.minus.u - exact) / exact, 1e-8);
}

TEST(Propagate, WronskianConservedAtCheckpoints) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  const auto xs = uniform_checkpoints(10.0, 16);
  for (cplx z : {cplx(19.807, 0.0), cplx(19.8, -0.01), cplx(12.0, 0.3)}) {
    const auto traj = trajectory(p, Zeta{cplx(-3.2, 0.01), z}, NormalizationCase::NonNodal, xs);
    ASSERT_GE(traj.size(), 18u);
    for (const auto& pt : traj) EXPECT_LT(std::abs(pt.state.wronskian() - 1.0), 1e-8) << pt.x;
  }
}

TEST(Propagate, VariationalMatchesFiniteDifferences) {
  const auto r = variational_check(free_potential(2.0), Zeta{0.3, 1.0}, NormalizationCase::NonNodal, 1e-5);
  EXPECT_LT(r.max_rel_error(), 1e-6);
  const TruncatedPotential p(fig1_potential(), 6.0);
  for (auto c : {NormalizationCase::NonNodal, NormalizationCase::Nodal}) {
    const auto q = variational_check(p, Zeta{cplx(-3.27, 0.001), cplx(19.8, -0.002)}, c, 1e-5);
    EXPECT_LT(q.max_rel_error(), 1e-6);
  }
}

TEST(Propagate, VariationalErrorIsSecondOrderInDelta) {
  // central differences of u(M) in z converge to the augmented d/dz u at O(delta^2)
  const TruncatedPotential p(fig1_potential(), 6.0);
  const Zeta z{-3.3, cplx(19.8, -0.05)};
  const auto mid = integrate_fundamentals(p, z, NormalizationCase::NonNodal);
  const auto fd_error = [&](double d) {
    const auto hi = integrate_fundamentals(p, Zeta{z.w, z.z + d}, NormalizationCase::NonNodal);
    const auto lo = integrate_fundamentals(p, Zeta{z.w, z.z - d}, NormalizationCase::NonNodal);
    return rel_diff(mid.plus.u_z, (hi.plus.u - lo.plus.u) / (2 * d));
  };
  const double e1 = fd_error(1e-2), e2 = fd_error(1e-3);
  EXPECT_GT(e1 / e2, 50.0);
  EXPECT_LT(e1 / e2, 200.0);
  EXPECT_LT(variational_check(p, z, NormalizationCase::NonNodal, 1e-5).max_rel_error(), 1e-6);
  EXPECT_LT(variational_check(p, z, NormalizationCase::NonNodal, 1e-6).max_rel_error(), 1e-6);
  EXPECT_THROW(variational_check(p, z, NormalizationCase::NonNodal, 1e-3), InputError);
}

TEST(Propagate, QuadratureIdentities) {
  const TruncatedPotential p(PotentialSpec::harmonic(1.0), 3.0);
  const auto bd = integrate_fundamentals(p, Zeta{0.0, 2.0}, NormalizationCase::NonNodal);
  for (int side : {1, -1}) {
    EXPECT_LT(dz_identity_residual(bd.at(side)), 1e-8);
    EXPECT_LT(dw_identity_residual(bd.at(side), 0.0), 1e-8);
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const TruncatedPotential q(fig1_potential(), 8.0);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx w{-3.0 + U(rng), 0.1 * U(rng)};
    const cplx z{19.8 + U(rng), 0.05 * U(rng)};
    for (auto c : {NormalizationCase::NonNodal, NormalizationCase::Nodal}) {
      const auto b = integrate_fundamentals(q, Zeta{w, z}, c);
      for (int side : {1, -1}) {
        EXPECT_LT(dz_identity_residual(b.at(side)), 1e-8);
        EXPECT_LT(dw_identity_residual(b.at(side), w), 1e-8);
      }
    }
  }
}

TEST(Propagate, SecondOrderAugmentation) {
  const TruncatedPotential p(fig1_potential(), 5.0);
  PropagateOptions opt;
  opt.second_order = true;
  const Zeta zeta{-3.0, cplx(19.8, -0.01)};
  const double d = 1e-5;
  const auto mid = integrate_fundamentals(p, zeta, NormalizationCase::NonNodal, opt);
  const auto hi = integrate_fundamentals(p, Zeta{zeta.w, zeta.z + d}, NormalizationCase::NonNodal, opt);
  const auto lo = integrate_fundamentals(p, Zeta{zeta.w, zeta.z - d}, NormalizationCase::NonNodal, opt);
  for (int side : {1, -1}) {
    const cplx fd = (hi.at(side).u_z - lo.at(side).u_z) / (2 * d);
    EXPECT_LT(rel_diff(mid.at(side).u_zz, fd), 1e-6);
  }
}
