#include <gtest/gtest.h>

#include <vector>

#include "trscat/ode.hpp"

using namespace trscat;

TEST(Ode, HarmonicOscillatorForwardAndBackward) {
  const auto f = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
  const auto fwd = ode::integrate<2>(f, 0.0, 10.0, {1.0, 0.0});
  EXPECT_NEAR(std::abs(fwd[0] - std::cos(10.0)), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(fwd[1] + std::sin(10.0)), 0.0, 1e-8);
  const auto back = ode::integrate<2>(f, 10.0, 0.0, fwd);
  EXPECT_NEAR(std::abs(back[0] - 1.0), 0.0, 1e-8);
}

TEST(Ode, ComplexGrowth) {
  const cplx lam{0.3, 2.0};
  const auto f = [lam](double, const ode::State<1>& y) { return ode::State<1>{lam * y[0]}; };
  const auto y = ode::integrate<1>(f, 0.0, -4.0, {1.0});
  EXPECT_LT(std::abs(y[0] - std::exp(-4.0 * lam)) / std::abs(y[0]), 1e-9);
}

TEST(Ode, StopsExactlyOnCheckpoints) {
  const auto f = [](double, const ode::State<1>& y) { return ode::State<1>{y[0]}; };
  const std::vector<double> cps{0.1, 0.5, 1.7};
  std::vector<double> seen;
  ode::integrate<1>(f, 0.0, 2.0, {1.0}, {}, cps, [&](double x, const ode::State<1>& y) {
    seen.push_back(x);
    EXPECT_LT(std::abs(y[0] - std::exp(x)) / std::exp(x), 1e-9);
  });
  EXPECT_EQ(seen, (std::vector<double>{0.0, 0.1, 0.5, 1.7, 2.0}));
}

TEST(Ode, StepBudgetIsEnforced) {
  const auto f = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -1e6 * y[0]}; };
  ode::Options opt;
  opt.max_steps = 50;
  EXPECT_THROW(ode::integrate<2>(f, 0.0, 10.0, {1.0, 0.0}, opt), DomainError);
}

TEST(Ode, FifthOrderConvergence) {
  // error at fixed tolerance should shrink as tolerance is tightened
  const auto f = [](double x, const ode::State<1>& y) { return ode::State<1>{std::cos(x) * y[0]}; };
  double prev = 1.0;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    ode::Options o;
    o.rtol = tol;
    o.atol = tol * 1e-2;
    const auto y = ode::integrate<1>(f, 0.0, 5.0, {1.0}, o);
    const double err = std::abs(y[0] - std::exp(std::sin(5.0)));
    EXPECT_LT(err, prev);
    EXPECT_LT(err, 50 * tol);
    prev = err;
  }
}
