#pragma once

// Fundamental solutions u_zeta, v_zeta of  u'' = (V - z) u  launched from x = 0,
// together with the variational derivatives d/dw u, d/dz u (and optionally
// d^2/dz^2 u) and the running quadratures  int_0^x u^2,  int_0^x u v.

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trscat/core.hpp"
#include "trscat/ode.hpp"
#include "trscat/potential.hpp"

namespace trscat {

/// How the bound state is pinned at the origin: Phi(0) = 1 (non-nodal) or
/// Phi(0) = 0, Phi'(0) = 1 (nodal).
enum class NormalizationCase { NonNodal, Nodal };

inline std::string to_string(NormalizationCase c) {
  return c == NormalizationCase::Nodal ? "nodal" : "non_nodal";
}

/// A point (w, z) in C^2: w mixes the initial slope, z is the energy.
struct Zeta {
  cplx w{};
  cplx z{};
};

struct StateVector {
  cplx u, du;        // u, u'
  cplx v, dv;        // v, v'
  cplx u_w, du_w;    // d/dw u, d/dw u'
  cplx u_z, du_z;    // d/dz u, d/dz u'
  cplx Iuu, Iuv;     // int_0^x u^2, int_0^x u v
  cplx u_zz, du_zz;  // d^2/dz^2 u, its x-derivative (only with second-order augmentation)

  cplx wronskian() const { return u * dv - du * v; }

  static constexpr std::size_t kBase = 10;
  static constexpr std::size_t kWithSecond = 12;

  template <std::size_t N>
  ode::State<N> pack() const {
    ode::State<N> s{u, du, v, dv, u_w, du_w, u_z, du_z, Iuu, Iuv};
    if constexpr (N > kBase) {
      s[10] = u_zz;
      s[11] = du_zz;
    }
    return s;
  }

  template <std::size_t N>
  static StateVector unpack(const ode::State<N>& s) {
    StateVector r{s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9], {}, {}};
    if constexpr (N > kBase) {
      r.u_zz = s[10];
      r.du_zz = s[11];
    }
    return r;
  }
};

/// Initial data at x = 0 for the two normalization cases.
inline StateVector initial_conditions(NormalizationCase c, cplx w) {
  const cplx d = 1.0 + w * w;
  if (std::abs(d) < 1e-14)
    throw DomainError("initial_conditions: 1 + w^2 = 0 (w = +-i) makes the normalization singular");
  StateVector s{};
  if (c == NormalizationCase::NonNodal) {
    s.u = 1.0;
    s.du = w;
    s.v = -w / d;
    s.dv = 1.0 / d;
    s.u_w = 0.0;
    s.du_w = 1.0;
  } else {
    s.u = -w;
    s.du = 1.0;
    s.v = -1.0 / d;
    s.dv = -w / d;
    s.u_w = -1.0;
    s.du_w = 0.0;
  }
  return s;
}

/// Values of the fundamental system at x = +M and x = -M.
struct BoundaryData {
  Zeta zeta;
  NormalizationCase norm_case = NormalizationCase::NonNodal;
  double M = 0.0;
  StateVector plus;   // at x = +M
  StateVector minus;  // at x = -M; its Iuu, Iuv are int_0^{-M} (negative orientation)
  bool has_second = false;

  const StateVector& at(int side) const { return side > 0 ? plus : minus; }

  cplx X1(int side) const { return at(side).u; }
  cplx X2(int side) const { return at(side).du; }

  /// int_{-M}^0 u^2
  cplx Iuu_left() const { return -minus.Iuu; }
  /// int_0^M u^2
  cplx Iuu_right() const { return plus.Iuu; }
  cplx Iuu_total() const { return Iuu_left() + Iuu_right(); }
};

struct PropagateOptions {
  ode::Options ode{};
  bool second_order = false;  // also integrate d^2/dz^2 u
};

namespace detail {

template <std::size_t N, class Pot>
auto fundamental_rhs(const Pot& V, cplx z) {
  return [&V, z](double x, const ode::State<N>& y) {
    const cplx q = V(x) - z;
    ode::State<N> d{};
    d[0] = y[1];
    d[1] = q * y[0];
    d[2] = y[3];
    d[3] = q * y[2];
    d[4] = y[5];
    d[5] = q * y[4];
    d[6] = y[7];
    d[7] = q * y[6] - y[0];
    d[8] = y[0] * y[0];
    d[9] = y[0] * y[2];
    if constexpr (N > StateVector::kBase) {
      d[10] = y[11];
      d[11] = q * y[10] - 2.0 * y[6];
    }
    return d;
  };
}

template <std::size_t N, class Pot, class Observer>
StateVector propagate_to(const Pot& V, const StateVector& s0, cplx z, double x_end,
                         const ode::Options& opt, std::span<const double> checkpoints,
                         Observer&& obs) {
  const auto rhs = fundamental_rhs<N>(V, z);
  const auto end = ode::integrate<N>(rhs, 0.0, x_end, s0.template pack<N>(), opt, checkpoints,
                                     [&obs](double x, const ode::State<N>& y) {
                                       obs(x, StateVector::unpack<N>(y));
                                     });
  return StateVector::unpack<N>(end);
}

} // namespace detail

/// Integrate the augmented fundamental system from 0 to +M and from 0 to -M.
/// `observer(x, state)` sees x = 0, every checkpoint and both end points.
template <class Pot, class Observer>
BoundaryData integrate_fundamentals(const Pot& V, double M, const Zeta& zeta, NormalizationCase c,
                                    const PropagateOptions& opt, std::span<const double> checkpoints,
                                    Observer&& observer) {
  if (!(M > 0.0)) throw InputError("integrate_fundamentals: M must be positive");
  const StateVector s0 = initial_conditions(c, zeta.w);
  std::vector<double> right, left;
  for (double x : checkpoints) {
    if (x > 0.0 && x < M) right.push_back(x);
    if (x < 0.0 && x > -M) left.push_back(x);
  }
  std::sort(right.begin(), right.end());
  std::sort(left.begin(), left.end(), std::greater<>());

  BoundaryData bd;
  bd.zeta = zeta;
  bd.norm_case = c;
  bd.M = M;
  bd.has_second = opt.second_order;
  if (opt.second_order) {
    bd.plus = detail::propagate_to<StateVector::kWithSecond>(V, s0, zeta.z, M, opt.ode, right, observer);
    bd.minus = detail::propagate_to<StateVector::kWithSecond>(V, s0, zeta.z, -M, opt.ode, left, observer);
  } else {
    bd.plus = detail::propagate_to<StateVector::kBase>(V, s0, zeta.z, M, opt.ode, right, observer);
    bd.minus = detail::propagate_to<StateVector::kBase>(V, s0, zeta.z, -M, opt.ode, left, observer);
  }
  return bd;
}

inline BoundaryData integrate_fundamentals(const TruncatedPotential& p, const Zeta& zeta,
                                           NormalizationCase c, const PropagateOptions& opt = {}) {
  return integrate_fundamentals(p, p.M(), zeta, c, opt, std::span<const double>{},
                                [](double, const StateVector&) {});
}

/// States at the requested positions in [-M, M] (sorted ascending in the result).
struct TrajectoryPoint {
  double x;
  StateVector state;
};

inline std::vector<TrajectoryPoint> trajectory(const TruncatedPotential& p, const Zeta& zeta,
                                               NormalizationCase c, std::span<const double> xs,
                                               const PropagateOptions& opt = {}) {
  std::vector<TrajectoryPoint> out;
  integrate_fundamentals(p, p.M(), zeta, c, opt, xs, [&out](double x, const StateVector& s) {
    out.push_back({x, s});
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  // x = 0 is reported by both half-line sweeps
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x == b.x; }),
            out.end());
  return out;
}

/// Evenly spaced checkpoints on [-M, M] (excluding 0 and the end points).
inline std::vector<double> uniform_checkpoints(double M, int count) {
  std::vector<double> xs;
  for (int i = 1; i <= count; ++i) {
    const double x = -M + 2.0 * M * i / (count + 1);
    if (x != 0.0) xs.push_back(x);
  }
  return xs;
}

// ---------------------------------------------------------------------------
// Consistency checks of the variational system.

struct VariationalReport {
  double max_rel_error_w = 0.0;  // d/dw u(+-M), d/dw u'(+-M) vs central differences
  double max_rel_error_z = 0.0;  // d/dz u(+-M), d/dz u'(+-M) vs central differences
  double max_rel_error() const { return std::max(max_rel_error_w, max_rel_error_z); }
};

inline double rel_diff(cplx a, cplx b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

/// Compare the augmented-system derivatives at +-M with central finite
/// differences of u at zeta +- (delta, 0) and zeta +- (0, delta).
inline VariationalReport variational_check(const TruncatedPotential& p, const Zeta& zeta,
                                           NormalizationCase c, double delta,
                                           const PropagateOptions& opt = {}) {
  if (!(delta >= 1e-7 && delta <= 1e-4))
    throw InputError("variational_check: delta must lie in [1e-7, 1e-4]");
  const BoundaryData mid = integrate_fundamentals(p, zeta, c, opt);
  const auto at = [&](cplx dw, cplx dz) {
    return integrate_fundamentals(p, Zeta{zeta.w + dw, zeta.z + dz}, c, opt);
  };
  const BoundaryData wp = at(delta, 0.0), wm = at(-delta, 0.0);
  const BoundaryData zp = at(0.0, delta), zm = at(0.0, -delta);

  VariationalReport r;
  for (int side : {1, -1}) {
    const auto& s = mid.at(side);
    const cplx fd_w = (wp.at(side).u - wm.at(side).u) / (2.0 * delta);
    const cplx fd_dw = (wp.at(side).du - wm.at(side).du) / (2.0 * delta);
    const cplx fd_z = (zp.at(side).u - zm.at(side).u) / (2.0 * delta);
    const cplx fd_dz = (zp.at(side).du - zm.at(side).du) / (2.0 * delta);
    r.max_rel_error_w = std::max({r.max_rel_error_w, rel_diff(s.u_w, fd_w), rel_diff(s.du_w, fd_dw)});
    r.max_rel_error_z = std::max({r.max_rel_error_z, rel_diff(s.u_z, fd_z), rel_diff(s.du_z, fd_dz)});
  }
  return r;
}

/// Relative residual of  d/dz u = (int_0^x u v) u - (int_0^x u^2) v  at x.
inline double dz_identity_residual(const StateVector& s) {
  return rel_diff(s.u_z, s.Iuv * s.u - s.Iuu * s.v);
}

/// Relative residual of  d/dw u = w/(1+w^2) u + v  at x.
inline double dw_identity_residual(const StateVector& s, cplx w) {
  return rel_diff(s.u_w, w / (1.0 + w * w) * s.u + s.v);
}

} // namespace trscat
