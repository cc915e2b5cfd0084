#pragma once

// Dormand-Prince 5(4) with PI step-size control, for fixed-size complex
// systems y' = f(x, y). Integrates in either direction and can stop exactly
// on caller-supplied checkpoints.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "trscat/core.hpp"

namespace trscat::ode {

template <std::size_t N>
using State = std::array<cplx, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-3;
  double max_step = 0.25;
  long max_steps = 10'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
};

namespace detail {

template <std::size_t N>
inline State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    const double hc = h * c;
    for (std::size_t i = 0; i < N; ++i) out[i] += hc * (*k)[i];
  }
  return out;
}

// Dormand & Prince (1980) coefficients.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b* (fifth minus fourth order weights)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace detail

/// Integrate from x0 to x1 (x1 may be less than x0). `on_checkpoint(x, y)` is
/// called at x0, at every checkpoint strictly between x0 and x1 (which must be
/// ordered in the direction of integration) and at x1.
template <std::size_t N, class Rhs, class Observer>
State<N> integrate(const Rhs& f, double x0, double x1, State<N> y, const Options& opt,
                   std::span<const double> checkpoints, Observer&& on_checkpoint,
                   Stats* stats = nullptr) {
  using namespace detail;
  on_checkpoint(x0, y);
  if (x0 == x1) return y;

  const double dir = x1 > x0 ? 1.0 : -1.0;
  double x = x0;
  double h = dir * std::min(opt.initial_step, std::abs(x1 - x0));
  double err_prev = 1e-4;
  constexpr double beta = 0.04;
  constexpr double alpha = 0.2 - 0.75 * beta;

  std::size_t next_cp = 0;
  while (next_cp < checkpoints.size() && dir * (checkpoints[next_cp] - x0) <= 0.0) ++next_cp;

  State<N> k1 = f(x, y);
  long steps = 0;
  while (dir * (x1 - x) > 0.0) {
    if (++steps > opt.max_steps)
      throw DomainError("ODE integration: step budget exhausted before reaching tolerance");

    double target = x1;
    if (next_cp < checkpoints.size() && dir * (checkpoints[next_cp] - x1) < 0.0)
      target = checkpoints[next_cp];
    bool hits_target = false;
    if (dir * (x + h - target) >= 0.0) {
      h = target - x;
      hits_target = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x)))
      throw DomainError("ODE integration: step size underflow at x = " + std::to_string(x));

    const State<N> k2 = f(x + c2 * h, axpy(y, h, {{a21, &k1}}));
    const State<N> k3 = f(x + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(x + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = f(x + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        f(x + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> ynew = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double xnew = hits_target ? target : x + h;
    const State<N> k7 = f(xnew, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += std::norm(e) / (sc * sc);
    }
    err = std::sqrt(err / static_cast<double>(N));

    if (err <= 1.0) {
      x = xnew;
      y = ynew;
      k1 = k7;
      if (stats) ++stats->accepted;
      if (hits_target && next_cp < checkpoints.size() && target == checkpoints[next_cp]) {
        on_checkpoint(x, y);
        ++next_cp;
      }
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -alpha) * std::pow(err_prev, beta);
      fac = std::clamp(fac, 0.2, 5.0);
      err_prev = e;
      h = dir * std::min(std::abs(h) * fac, opt.max_step);
    } else {
      if (stats) ++stats->rejected;
      const double e = std::isfinite(err) ? err : 1e10;
      h *= std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9);
    }
  }
  on_checkpoint(x1, y);
  return y;
}

template <std::size_t N, class Rhs>
State<N> integrate(const Rhs& f, double x0, double x1, State<N> y, const Options& opt = {},
                   Stats* stats = nullptr) {
  return integrate<N>(f, x0, x1, y, opt, std::span<const double>{}, [](double, const State<N>&) {},
                      stats);
}

} // namespace trscat::ode
