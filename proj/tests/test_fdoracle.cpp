#include <gtest/gtest.h>

#include "trscat/fdoracle.hpp"

using namespace trscat;

namespace {
std::pair<cplx, cplx> slab_rt(double V0, double M, double z) {
  const cplx k = std::sqrt(cplx(z));
  const cplx q = std::sqrt(cplx(z - V0));
  const double a = 2 * M;
  const cplx den = std::cos(q * a) - I * (k * k + q * q) / (2.0 * k * q) * std::sin(q * a);
  const cplx r = I * (q * q - k * k) / (2.0 * k * q) * std::sin(q * a) / den;
  return {r * std::exp(-2.0 * I * k * M), std::exp(-I * k * a) / den};
}
} // namespace

TEST(Tridiagonal, MatchesDenseSolve) {
  // small system that needs pivoting (zero leading diagonal)
  std::vector<cplx> sub{0.0, 2.0, 1.0, I}, diag{0.0, 1.0, 3.0, 2.0}, sup{1.0, -1.0, I, 0.0};
  const std::vector<cplx> x{1.0, cplx(2, 1), -1.0, cplx(0, 3)};
  std::vector<cplx> b(4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    b[i] = diag[i] * x[i];
    if (i > 0) b[i] += sub[i] * x[i - 1];
    if (i < 3) b[i] += sup[i] * x[i + 1];
  }
  const auto y = solve_tridiagonal(sub, diag, sup, b);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(std::abs(y[i] - x[i]), 1e-14);
  EXPECT_THROW(solve_tridiagonal<double>({0, 0}, {0, 0}, {0, 0}, {1, 1}), DomainError);
}

TEST(Oracle, FreeCase) {
  const TruncatedPotential p(PotentialSpec::square_well(0.0), 2.0);
  for (double z : {0.5, 4.0, 20.0}) {
    const auto r = oracle_rt(p, z);
    EXPECT_LT(std::abs(r.R), 1e-10);
    EXPECT_NEAR(std::abs(r.T), 1.0, 1e-10);
  }
  // phase error of the lattice wave vanishes as h -> 0
  OracleOptions coarse, fine;
  coarse.h = 0.02;
  fine.h = 0.005;
  EXPECT_LT(std::abs(std::arg(oracle_rt(p, 4.0, fine).T)), 1e-12);
  EXPECT_LT(std::abs(std::arg(oracle_rt(p, 4.0, coarse).T)), 1e-12);
}

TEST(Oracle, SquareWellClosedForm) {
  const TruncatedPotential p(PotentialSpec::square_well(-2.0), 1.0);
  const auto [R, T] = slab_rt(-2.0, 1.0, 1.0);
  const auto r = oracle_rt(p, 1.0);
  EXPECT_LT(std::abs(r.R - R), 1e-4);
  EXPECT_LT(std::abs(r.T - T), 1e-4);
}

TEST(Oracle, SecondOrderConvergence) {
  const TruncatedPotential p(fig1_potential(), 6.0);
  std::vector<cplx> R;
  for (double h : {4e-3, 2e-3, 1e-3}) {
    OracleOptions o;
    o.h = h;
    R.push_back(oracle_rt(p, 25.0, o).R);
  }
  const double ratio = std::abs(R[0] - R[1]) / std::abs(R[1] - R[2]);
  EXPECT_NEAR(ratio, 4.0, 0.3);
}

TEST(Oracle, FluxToSecondOrder) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  for (double z : {8.0, 19.0, 33.0}) {
    const auto r = oracle_rt(p, z);
    EXPECT_LT(std::abs(std::norm(r.R) + std::norm(r.T) - 1.0), 1e-6);
  }
}

TEST(Oracle, AgreesWithOdeAwayFromTheResonance) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  const auto fd = oracle_scan(p, 5.0, 45.0, 200);
  const auto ode = scan_rt(p, 5.0, 45.0, 200);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i)
    worst = std::max({worst, std::abs(fd[i].R - ode[i].R), std::abs(fd[i].T - ode[i].T)});
  EXPECT_LE(worst, 1e-3);
}

TEST(Oracle, PeakLocationMatchesOde) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  const auto peak = [](const std::vector<ScatteringCoefficients>& rows) {
    std::size_t b = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (std::norm(rows[i].T) > std::norm(rows[b].T)) b = i;
    return rows[b].z.real();
  };
  const double a = peak(oracle_scan(p, 19.7, 19.9, 401));
  const double b = peak(scan_rt(p, 19.7, 19.9, 401));
  EXPECT_NEAR(a, b, 0.05);
  EXPECT_NEAR(a, b, 1e-3);
}

TEST(Oracle, Preconditions) {
  const TruncatedPotential p(fig1_potential(), 10.0);
  EXPECT_THROW(oracle_rt(p, -1.0), DomainError);
  OracleOptions o;
  o.h = 0.05;
  EXPECT_THROW(oracle_rt(p, 10.0, o), DomainError);  // h sqrt(z) >= 0.1
  o.h = 0.003;
  EXPECT_THROW(oracle_rt(p, 10.0, o), InputError);  // M not on the grid
}
