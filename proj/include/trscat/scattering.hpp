#pragma once

// Outgoing-boundary functionals Theta, reflection/transmission coefficients
// of the truncated operator and energy scans.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "trscat/core.hpp"
#include "trscat/ode.hpp"
#include "trscat/parallel.hpp"
#include "trscat/potential.hpp"
#include "trscat/propagate.hpp"

namespace trscat {

/// ZeroReflection: both sides right-outgoing. Resonance: outgoing on each side.
enum class ThetaMode { ZeroReflection, Resonance };

inline std::string to_string(ThetaMode m) {
  return m == ThetaMode::Resonance ? "resonance" : "zero_reflection";
}

/// Sign s of the i sqrt(z) term on the left:  Theta^- = u'(-M) + s i sqrt(z) u(-M).
inline double minus_side_sign(ThetaMode m) { return m == ThetaMode::Resonance ? 1.0 : -1.0; }

struct ThetaPair {
  cplx plus{}, minus{};
  ThetaMode mode = ThetaMode::ZeroReflection;
  Zeta zeta;

  double max_abs() const { return std::max(std::abs(plus), std::abs(minus)); }
};

/// Theta evaluated from the boundary data at zeta = bd.zeta.
inline ThetaPair theta_map(const BoundaryData& bd, ThetaMode mode) {
  const cplx k = principal_sqrt(bd.zeta.z);
  const double s = minus_side_sign(mode);
  return {bd.plus.du - I * k * bd.plus.u, bd.minus.du + s * I * k * bd.minus.u, mode, bd.zeta};
}

/// Partial derivatives of Theta^+- in w and z.
struct ThetaJacobian {
  cplx dw_plus, dz_plus, dw_minus, dz_minus;

  cplx det() const { return dw_plus * dz_minus - dz_plus * dw_minus; }
};

inline ThetaJacobian theta_jacobian(const BoundaryData& bd, ThetaMode mode) {
  const cplx k = principal_sqrt(bd.zeta.z);
  const double s = minus_side_sign(mode);
  const auto& p = bd.plus;
  const auto& m = bd.minus;
  // d/dz (i sqrt z u) = i sqrt z u_z + i u / (2 sqrt z)
  return {p.du_w - I * k * p.u_w,
          p.du_z - I * k * p.u_z - I * p.u / (2.0 * k),
          m.du_w + s * I * k * m.u_w,
          m.du_z + s * (I * k * m.u_z + I * m.u / (2.0 * k))};
}

// ---------------------------------------------------------------------------

struct ScatteringCoefficients {
  cplx z{};
  cplx R{};  // incidence from the left
  cplx T{};
  std::optional<cplx> dR;  // dR/dz when requested
  std::string branch = "principal";
};

namespace detail {

inline void check_exponent(cplx k, double M) {
  if (std::abs(k.imag()) * 2.0 * M > 600.0)
    throw DomainError("compute_rt: |Im sqrt(z)| M too large; exp(i sqrt(z) M) would overflow");
}

} // namespace detail

struct ScatteringOptions {
  ode::Options ode{};
  bool derivative = false;  // also return dR/dz
};

/// Integrate from x = M backward with the transmitted wave e^{ikx} and
/// decompose at -M into A e^{ikx} + B e^{-ikx}; T = 1/A, R = B/A.
template <class Pot>
ScatteringCoefficients compute_rt(const Pot& V, double M, cplx z, const ScatteringOptions& opt = {}) {
  if (!(z.real() > 0.0)) throw DomainError("compute_rt: requires Re z > 0");
  const cplx k = principal_sqrt(z);
  detail::check_exponent(k, M);
  const cplx eM = std::exp(I * k * M);
  const cplx em = 1.0 / eM;
  const cplx two_ik = 2.0 * I * k;

  ScatteringCoefficients out;
  out.z = z;
  if (!opt.derivative) {
    const auto rhs = [&V, z](double x, const ode::State<2>& y) {
      return ode::State<2>{y[1], (V(x) - z) * y[0]};
    };
    const auto y = ode::integrate<2>(rhs, M, -M, {eM, I * k * eM}, opt.ode);
    const cplx A = (y[1] + I * k * y[0]) * eM / two_ik;
    const cplx B = (I * k * y[0] - y[1]) * em / two_ik;
    if (!(std::abs(A) > 1e-300) || !std::isfinite(std::abs(A)))
      throw DomainError("compute_rt: incoming amplitude vanishes (transmission pole)");
    out.T = 1.0 / A;
    out.R = B / A;
    return out;
  }

  // augmented with psi_z, psi_z':  psi_z'' = (V - z) psi_z - psi
  const auto rhs = [&V, z](double x, const ode::State<4>& y) {
    const cplx q = V(x) - z;
    return ode::State<4>{y[1], q * y[0], y[3], q * y[2] - y[0]};
  };
  const cplx dk = 1.0 / (2.0 * k);
  const cplx psi_z = I * M * dk * eM;
  const cplx dpsi_z = I * dk * eM + I * k * psi_z;
  const auto y = ode::integrate<4>(rhs, M, -M, {eM, I * k * eM, psi_z, dpsi_z}, opt.ode);
  const cplx A = (y[1] + I * k * y[0]) * eM / two_ik;
  const cplx B = (I * k * y[0] - y[1]) * em / two_ik;
  if (!(std::abs(A) > 1e-300) || !std::isfinite(std::abs(A)))
    throw DomainError("compute_rt: incoming amplitude vanishes (transmission pole)");
  const cplx dA = (y[3] + I * dk * y[0] + I * k * y[2]) * eM / two_ik + A * (I * M * dk - dk / k);
  const cplx dB = (I * dk * y[0] + I * k * y[2] - y[3]) * em / two_ik + B * (-I * M * dk - dk / k);
  out.T = 1.0 / A;
  out.R = B / A;
  out.dR = (dB * A - B * dA) / (A * A);
  return out;
}

inline ScatteringCoefficients compute_rt(const TruncatedPotential& p, cplx z,
                                         const ScatteringOptions& opt = {}) {
  return compute_rt(p, p.M(), z, opt);
}

/// Reflection coefficient built from the zero-reflection Theta map: choose w
/// so that Theta^+ vanishes (Theta^+ is affine in w), then normalise the
/// reflected amplitude  Theta^- e^{-ikM} / (-2ik)  by the incoming one.
struct ThetaReflection {
  cplx w_solved{};
  cplx R{};
  cplx theta_plus_residual{};
};

inline ThetaReflection reflection_from_theta(const BoundaryData& bd) {
  const cplx z = bd.zeta.z;
  const cplx k = principal_sqrt(z);
  detail::check_exponent(k, bd.M);
  const auto th = theta_map(bd, ThetaMode::ZeroReflection);
  const auto J = theta_jacobian(bd, ThetaMode::ZeroReflection);
  if (std::abs(J.dw_plus) < 1e-300 * std::max(1.0, std::abs(th.plus)))
    throw DomainError("reflection_from_theta: Theta^+ does not depend on w (degenerate affine solve)");
  const cplx dw = -th.plus / J.dw_plus;
  ThetaReflection r;
  r.w_solved = bd.zeta.w + dw;
  r.theta_plus_residual = th.plus + dw * J.dw_plus;
  // boundary data of the solved combination at -M
  const cplx u = bd.minus.u + dw * bd.minus.u_w;
  const cplx du = bd.minus.du + dw * bd.minus.du_w;
  const cplx theta_minus = du - I * k * u;
  const cplx eM = std::exp(I * k * bd.M);
  const cplx B = theta_minus / (eM * (-2.0 * I * k));
  const cplx A = (du + I * k * u) * eM / (2.0 * I * k);
  if (!(std::abs(A) > 1e-300)) throw DomainError("reflection_from_theta: incoming amplitude vanishes");
  r.R = B / A;
  return r;
}

/// R via the Theta construction at energy z (integrates the fundamentals at w = 0).
inline ThetaReflection reflection_via_theta(const TruncatedPotential& p, cplx z,
                                            NormalizationCase c = NormalizationCase::NonNodal) {
  return reflection_from_theta(integrate_fundamentals(p, Zeta{0.0, z}, c));
}

/// Uniform grid  E_i = lo + i (hi - lo)/(n - 1).
inline std::vector<double> energy_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo)) throw InputError("energy grid needs 0 < emin < emax");
  if (n < 2) throw InputError("energy grid needs at least 2 points");
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  e.back() = hi;
  return e;
}

/// compute_rt on a uniform real grid, evaluated in parallel; rows follow the grid.
inline std::vector<ScatteringCoefficients> scan_rt(const TruncatedPotential& p, double lo, double hi,
                                                   std::size_t n, unsigned threads = 0,
                                                   const ScatteringOptions& opt = {}) {
  const auto grid = energy_grid(lo, hi, n);
  std::vector<ScatteringCoefficients> rows(n);
  parallel_for(n, threads, [&](std::size_t i) { rows[i] = compute_rt(p, cplx(grid[i], 0.0), opt); });
  return rows;
}

/// Indices of strict local maxima of ys (interior points only).
inline std::vector<std::size_t> local_maxima(const std::vector<double>& ys) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i)
    if (ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]) out.push_back(i);
  return out;
}

/// Full width at half maximum of the peak at index i, with linear
/// interpolation of the half-height crossings. Throws if a side never drops.
inline double peak_fwhm(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t i) {
  if (xs.size() != ys.size() || i >= ys.size()) throw InputError("peak_fwhm: bad arguments");
  const double half = 0.5 * ys[i];
  std::size_t l = i, r = i;
  while (l > 0 && ys[l] > half) --l;
  while (r + 1 < ys.size() && ys[r] > half) ++r;
  if (ys[l] > half || ys[r] > half) throw DomainError("peak_fwhm: peak not resolved inside the scan");
  const auto cross = [&](std::size_t a, std::size_t b) {
    return xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a]);
  };
  return cross(r - 1, r) - cross(l, l + 1);
}

} // namespace trscat
