#include <gtest/gtest.h>

#include <random>

#include "trscat/scattering.hpp"

using namespace trscat;

namespace {

// Rectangular well/barrier of height V0 on [-M, M]: the textbook slab result
// for a slab on [0, 2M], shifted to be centred at the origin.
std::pair<cplx, cplx> slab_rt(double V0, double M, double z) {
  const cplx k = std::sqrt(cplx(z));
  const cplx q = std::sqrt(cplx(z - V0));
  const double a = 2 * M;
  const cplx den = std::cos(q * a) - I * (k * k + q * q) / (2.0 * k * q) * std::sin(q * a);
  const cplx t = std::exp(-I * k * a) / den;
  const cplx r = I * (q * q - k * k) / (2.0 * k * q) * std::sin(q * a) / den;
  return {r * std::exp(-2.0 * I * k * M), t};
}

TruncatedPotential free_potential(double M) { return {PotentialSpec::square_well(0.0), M}; }

} // namespace

TEST(Theta, OutgoingWaveAnnihilatesThetaPlus) {
  BoundaryData bd;
  bd.M = 1.0;
  bd.zeta = {0.0, 1.0};
  bd.plus.u = std::exp(I);
  bd.plus.du = I * std::exp(I);
  bd.minus.u = std::exp(I);   // e^{-ix} at x = -1
  bd.minus.du = -I * std::exp(I);
  const auto zr = theta_map(bd, ThetaMode::ZeroReflection);
  EXPECT_LT(std::abs(zr.plus), 1e-15);
  EXPECT_LT(std::abs(zr.minus - (-2.0 * I * std::exp(I))), 1e-15);
  const auto res = theta_map(bd, ThetaMode::Resonance);
  EXPECT_LT(std::abs(res.minus), 1e-15);
}

TEST(Theta, BranchCut) {
  BoundaryData bd;
  bd.zeta = {0.0, -1.0};
  EXPECT_THROW(theta_map(bd, ThetaMode::ZeroReflection), DomainError);
}

TEST(Theta, JacobianMatchesFiniteDifferences) {
  const TruncatedPotential p(fig1_potential(), 6.0);
  const Zeta z0{cplx(-3.2, 0.01), cplx(19.8, -0.01)};
  const double d = 1e-6;
  for (auto mode : {ThetaMode::ZeroReflection, ThetaMode::Resonance}) {
    const auto J = theta_jacobian(integrate_fundamentals(p, z0, NormalizationCase::NonNodal), mode);
    const auto th = [&](cplx dw, cplx dz) {
      return theta_map(integrate_fundamentals(p, Zeta{z0.w + dw, z0.z + dz}, NormalizationCase::NonNodal), mode);
    };
    const auto wp = th(d, 0.0), wm = th(-d, 0.0), zp = th(0.0, d), zm = th(0.0, -d);
    EXPECT_LT(rel_diff(J.dw_plus, (wp.plus - wm.plus) / (2 * d)), 1e-6);
    EXPECT_LT(rel_diff(J.dw_minus, (wp.minus - wm.minus) / (2 * d)), 1e-6);
    EXPECT_LT(rel_diff(J.dz_plus, (zp.plus - zm.plus) / (2 * d)), 1e-6);
    EXPECT_LT(rel_diff(J.dz_minus, (zp.minus - zm.minus) / (2 * d)), 1e-6);
  }
}

TEST(ComputeRT, FreePropagation) {
  for (double z : {0.3, 1.0, 7.0, 40.0}) {
    const auto r = compute_rt(free_potential(3.0), z);
    EXPECT_LT(std::abs(r.R), 1e-9);
    EXPECT_LT(std::abs(r.T - 1.0), 1e-8);
  }
}

TEST(ComputeRT, SquareWellClosedForm) {
  for (double V0 : {-2.0, 3.0}) {
    for (double z : {1.0, 2.5, 10.0}) {
      const TruncatedPotential p(PotentialSpec::square_well(V0), 1.0);
      const auto [R, T] = slab_rt(V0, 1.0, z);
      const auto r = compute_rt(p, z);
      EXPECT_LT(std::abs(r.R - R), 1e-8) << V0 << " " << z;
      EXPECT_LT(std::abs(r.T - T), 1e-8) << V0 << " " << z;
    }
  }
}

TEST(ComputeRT, FluxConservationRandomized) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    CosineDefect c;
    c.c0 = 10.0 * U(rng);
    c.terms = {{5.0 * U(rng), 1.0 + std::floor(3.0 * U(rng))}};
    c.defect_amplitude = 5.0 * U(rng);
    c.defect_frequency = 1.0;
    const TruncatedPotential p(PotentialSpec::cosine_defect(c), 2.0 + 8.0 * U(rng));
    const double z = 0.5 + 49.5 * U(rng);
    const auto r = compute_rt(p, z);
    EXPECT_LE(std::abs(std::norm(r.R) + std::norm(r.T) - 1.0), 1e-8) << trial;
  }
}

TEST(ComputeRT, PreconditionsAndOverflow) {
  EXPECT_THROW(compute_rt(free_potential(1.0), cplx(-1.0, 0.0)), DomainError);
  EXPECT_THROW(compute_rt(free_potential(1000.0), cplx(1.0, -1.0)), DomainError);
}

TEST(ComputeRT, DerivativeMatchesFiniteDifference) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  ScatteringOptions o;
  o.derivative = true;
  for (cplx z : {cplx(19.8, -0.001), cplx(25.0, 0.0), cplx(19.0, 0.01)}) {
    const auto m = compute_rt(p, z, o);
    ASSERT_TRUE(m.dR);
    const double d = 1e-6;
    const cplx fd = (compute_rt(p, z + d).R - compute_rt(p, z - d).R) / (2 * d);
    const cplx fdi = (compute_rt(p, z + I * d).R - compute_rt(p, z - I * d).R) / (2.0 * I * d);
    EXPECT_LT(rel_diff(*m.dR, fd), 1e-6);
    EXPECT_LT(rel_diff(*m.dR, fdi), 1e-6);
  }
}

TEST(ReflectionFromTheta, Free) {
  const auto r = reflection_via_theta(free_potential(2.0), 1.0);
  EXPECT_LT(std::abs(r.R), 1e-10);
}

TEST(ReflectionFromTheta, AgreesWithComputeRT) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  double worst = 0.0;
  for (double E = 18.0; E <= 21.0; E += 0.05) {
    const cplx a = compute_rt(p, E).R;
    const cplx b = reflection_via_theta(p, E).R;
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  EXPECT_LT(worst, 1e-8);
  // nodal normalisation and complex energies build the same R
  const cplx z{19.81, -0.002};
  EXPECT_LT(std::abs(reflection_via_theta(p, z, NormalizationCase::Nodal).R - compute_rt(p, z).R), 1e-8);
}

TEST(Scan, FreeScanIsTransparent) {
  const auto rows = scan_rt(free_potential(4.0), 1.0, 30.0, 40, 2);
  ASSERT_EQ(rows.size(), 40u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(std::norm(rows[i].T), 1.0, 1e-8);
    if (i) { EXPECT_GT(rows[i].z.real(), rows[i - 1].z.real()); }
  }
  EXPECT_THROW(scan_rt(free_potential(4.0), 3.0, 2.0, 10), InputError);
  EXPECT_THROW(scan_rt(free_potential(4.0), 0.0, 2.0, 10), InputError);
}

TEST(Scan, Fig1SinglePeak) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  // the peak is only ~0.006 wide, so the grid spacing is 1e-3
  const auto rows = scan_rt(p, 18.0, 21.0, 3001, 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::norm(rows[i].T) > std::norm(rows[best].T)) best = i;
  EXPECT_NEAR(rows[best].z.real(), 19.77, 0.1);
  EXPECT_GT(std::norm(rows[best].T), 0.95);
  EXPECT_LT(std::norm(rows[best].R), 0.05);
  // away from the peak the gap reflects
  int high = 0;
  for (const auto& r : rows) high += std::norm(r.T) > 0.5;
  EXPECT_LT(high, 10);
  // |T| at the converged bound-state energy sits within 0.05 of the scan maximum
  EXPECT_LT(std::abs(std::abs(compute_rt(p, 19.80707221).T) - std::abs(rows[best].T)), 0.05);
}

TEST(Scan, Fig2BandGapStructure) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  const auto rows = scan_rt(p, 5.0, 45.0, 801);
  // count transitions between transmitting and reflecting stretches
  int switches = 0;
  bool high = std::norm(rows[0].T) > 0.5;
  for (const auto& r : rows) {
    const bool h = std::norm(r.T) > 0.5;
    if (h != high) ++switches;
    high = h;
  }
  EXPECT_GE(switches, 4);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                 if (i == 37) throw DomainError("boom");
               }),
               DomainError);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i]++; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
