#pragma once

// Zero-reflection states and resonances near a bound state: the frozen-Jacobian
// fixed-point map, Newton, the leading-order location formulas and the
// comparison report on the disk Gamma_M.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trscat/boundstate.hpp"
#include "trscat/core.hpp"
#include "trscat/parallel.hpp"
#include "trscat/propagate.hpp"
#include "trscat/scattering.hpp"

namespace trscat {

/// Tolerances used whenever boundary data feed root finding or asymptotics.
inline PropagateOptions tight_propagation() {
  PropagateOptions o;
  o.ode.rtol = 1e-13;
  o.ode.atol = 1e-16;
  o.ode.max_step = 0.05;
  return o;
}

using Mat2 = std::array<std::array<cplx, 2>, 2>;

struct XiData {
  ThetaMode mode = ThetaMode::ZeroReflection;
  BoundaryData bd;  // at eta
  ThetaJacobian J;
  cplx N{};
  Mat2 Xi{};

  /// max |Xi J - 1| entrywise
  double inverse_residual() const {
    const Mat2 Jm{{{J.dw_plus, J.dz_plus}, {J.dw_minus, J.dz_minus}}};
    double r = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const cplx s = Xi[i][0] * Jm[0][j] + Xi[i][1] * Jm[1][j];
        r = std::max(r, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    return r;
  }
};

inline Mat2 inverse_jacobian(const ThetaJacobian& J, cplx N) {
  return Mat2{{{J.dz_minus / N, -J.dz_plus / N}, {-J.dw_minus / N, J.dw_plus / N}}};
}

inline XiData xi_data(const TruncatedPotential& p, const Zeta& eta, NormalizationCase c,
                      ThetaMode mode = ThetaMode::ZeroReflection,
                      const PropagateOptions& opt = tight_propagation()) {
  XiData x;
  x.mode = mode;
  x.bd = integrate_fundamentals(p, eta, c, opt);
  x.J = theta_jacobian(x.bd, mode);
  x.N = x.J.det();
  if (!(std::abs(x.N) > 0.0) || !std::isfinite(std::abs(x.N)))
    throw DomainError("xi_data: N(eta) vanishes; M too small or eta inconsistent");
  x.Xi = inverse_jacobian(x.J, x.N);
  return x;
}

inline XiData xi_data(const EtaData& eta, const TruncatedPotential& p,
                      ThetaMode mode = ThetaMode::ZeroReflection) {
  return xi_data(p, eta.eta(), eta.norm_case, mode);
}

// ---------------------------------------------------------------------------

enum class LocateMethod { FixedPoint, Newton };

inline std::string to_string(LocateMethod m) { return m == LocateMethod::Newton ? "newton" : "fixed_point"; }

struct LocateOptions {
  LocateMethod method = LocateMethod::Newton;
  int max_iterations = 100;
  double step_tolerance = 1e-14;  // on |zeta_{n+1} - zeta_n|, relative to max(1, |zeta|)
  double residual_tolerance = 1e-10;
  double safety = 10.0;
  bool enforce_ball = true;
  std::optional<double> ball_radius;  // default exp(-kM)/M^2
  PropagateOptions propagation = tight_propagation();
};

struct LocatedState {
  ThetaMode mode = ThetaMode::ZeroReflection;
  LocateMethod method = LocateMethod::Newton;
  Zeta eta;
  Zeta zeta;
  ThetaPair residual;
  int iterations = 0;
  std::vector<double> step_sizes;  // |zeta_{n+1} - zeta_n|
  double ball_radius = 0.0;
  double distance = 0.0;    // max(|w - w0|, |z - E|)
  double z_distance = 0.0;  // |z - E|, or |Re z - E| for resonances
  bool in_ball = false;     // |z - E| <= ball radius
  bool in_safety_ball = false;
};

inline double zeta_distance(const Zeta& a, const Zeta& b) {
  return std::max(std::abs(a.w - b.w), std::abs(a.z - b.z));
}

/// Root of Theta from zeta_0 = eta, either by iterating the frozen-Jacobian
/// map  zeta -> zeta - Xi Theta(zeta)  or by Newton with a fresh Jacobian.
inline LocatedState locate_state(const TruncatedPotential& p, const Zeta& eta, NormalizationCase c,
                                 double k, ThetaMode mode, const LocateOptions& o = {}) {
  LocatedState s;
  s.mode = mode;
  s.method = o.method;
  s.eta = eta;
  const double M = p.M();
  s.ball_radius = o.ball_radius.value_or(std::exp(-k * M) / (M * M));

  const XiData xi0 = xi_data(p, eta, c, mode, o.propagation);
  Zeta zeta = eta;
  BoundaryData bd = xi0.bd;
  ThetaPair th = theta_map(bd, mode);
  bool converged = false;
  for (int it = 0; it < o.max_iterations; ++it) {
    Mat2 X = xi0.Xi;
    if (o.method == LocateMethod::Newton && it > 0) {
      const auto J = theta_jacobian(bd, mode);
      const cplx N = J.det();
      if (!(std::abs(N) > 0.0)) throw DomainError("locate_state: Jacobian singular during iteration");
      X = inverse_jacobian(J, N);
    }
    const cplx dw = -(X[0][0] * th.plus + X[0][1] * th.minus);
    const cplx dz = -(X[1][0] * th.plus + X[1][1] * th.minus);
    zeta = Zeta{zeta.w + dw, zeta.z + dz};
    const double step = std::max(std::abs(dw), std::abs(dz));
    s.step_sizes.push_back(step);
    s.iterations = it + 1;
    if (!std::isfinite(step)) throw DomainError("locate_state: iteration diverged");
    bd = integrate_fundamentals(p, zeta, c, o.propagation);
    th = theta_map(bd, mode);
    const double scale = std::max({1.0, std::abs(zeta.w), std::abs(zeta.z)});
    if (step < o.step_tolerance * scale) {
      converged = true;
      break;
    }
    // stalled at the integration noise floor with the residual already met
    if (th.max_abs() <= o.residual_tolerance && s.step_sizes.size() >= 2 &&
        step >= 0.5 * s.step_sizes[s.step_sizes.size() - 2] && step < 1e-12 * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) throw DomainError("locate_state: iteration cap reached without convergence");
  s.zeta = zeta;
  s.residual = th;
  s.distance = zeta_distance(zeta, eta);
  // the energy offset is what the ball radius controls; the w offset is
  // reported but scales with |w0| and is not compared. A resonance sits a
  // width Im z below the axis, so only its real part is held to the ball.
  s.z_distance = mode == ThetaMode::Resonance ? std::abs(zeta.z.real() - eta.z.real()) : std::abs(zeta.z - eta.z);
  s.in_ball = s.z_distance <= s.ball_radius;
  s.in_safety_ball = s.z_distance <= o.safety * s.ball_radius;
  if (th.max_abs() > o.residual_tolerance)
    throw DomainError("locate_state: residual " + std::to_string(th.max_abs()) + " above tolerance");
  if (o.enforce_ball && !s.in_safety_ball)
    throw DomainError("locate_state: converged outside " + std::to_string(o.safety) +
                      "x the ball radius (spurious root)");
  return s;
}

inline LocatedState locate_state(const EtaData& eta, const TruncatedPotential& p, ThetaMode mode,
                                 const LocateOptions& o = {}) {
  return locate_state(p, eta.eta(), eta.norm_case, eta.k, mode, o);
}

// ---------------------------------------------------------------------------
// Leading-order location formulas from boundary data at eta.

struct AsymptoticLocations {
  cplx z_Y{}, w_Y{}, z_X{};
  // real/imaginary split forms
  double re_split = 0.0, im_Y_split = 0.0, im_X_split = 0.0;
  double P_plus = 0.0, P_minus = 0.0;  // v'(+-M)^2 + E v(+-M)^2
  double I_total = 0.0;                // int_{-M}^{M} u^2
  double im_gap = 0.0;                 // 2 sqrt(E) / (I P_-)  = Im z_Y - Im z_X
  double agreement_Y = 0.0;            // |full - split| / |full - E|
  double agreement_X = 0.0;

  double distance_quotient() const { return std::abs(P_plus / P_minus); }
};

inline AsymptoticLocations asymptotic_locations(const BoundaryData& bd, double E) {
  const double sE = std::sqrt(E);
  const auto& p = bd.plus;
  const auto& m = bd.minus;
  const double up = p.u.real(), dup = p.du.real(), vp = p.v.real(), dvp = p.dv.real();
  const double um = m.u.real(), dum = m.du.real(), vm = m.v.real(), dvm = m.dv.real();
  const double Ileft = bd.Iuu_left().real(), Iright = bd.Iuu_right().real();
  const double Itot = Ileft + Iright;

  const cplx ap = dvp - I * sE * vp, am = dvm - I * sE * vm;  // v' - i sqrt(E) v
  const cplx bp = dup - I * sE * up, bm = dum - I * sE * um;  // u' - i sqrt(E) u
  if (std::abs(ap) == 0.0 || std::abs(am) == 0.0)
    throw DomainError("asymptotic_locations: v' - i sqrt(E) v vanishes; eta is corrupted");

  AsymptoticLocations a;
  const cplx den = Itot * ap * am;
  a.z_Y = E - (ap * bm - am * bp) / den;
  a.w_Y = bd.zeta.w - (Ileft * am * bp + Iright * ap * bm) / den;

  const cplx am_out = dvm + I * sE * vm, bm_out = dum + I * sE * um;
  a.z_X = E - (ap * bm_out - am_out * bp) / (Itot * am_out * ap);

  a.P_plus = dvp * dvp + E * vp * vp;
  a.P_minus = dvm * dvm + E * vm * vm;
  a.I_total = Itot;
  const double PP = a.P_plus * a.P_minus;
  a.re_split = E - (a.P_plus * (dvm * dum + E * vm * um) - a.P_minus * (dvp * dup + E * vp * up)) / (Itot * PP);
  a.im_Y_split = sE * (a.P_plus - a.P_minus) / (Itot * PP);
  a.im_X_split = -sE * (a.P_plus + a.P_minus) / (Itot * PP);
  a.im_gap = 2.0 * sE / (Itot * a.P_minus);
  a.agreement_Y = std::abs(a.z_Y - cplx(a.re_split, a.im_Y_split)) / std::abs(a.z_Y - E);
  a.agreement_X = std::abs(a.z_X - cplx(a.re_split, a.im_X_split)) / std::abs(a.z_X - E);
  return a;
}

inline AsymptoticLocations asymptotic_locations(const EtaData& eta, const TruncatedPotential& p) {
  return asymptotic_locations(integrate_fundamentals(p, eta.eta(), eta.norm_case, tight_propagation()),
                              eta.E);
}

// ---------------------------------------------------------------------------

/// Closed form for dR/dz written with int_0^M u (diagnostic; compared with
/// the exact derivative from the augmented backward integration).
inline cplx dz_reflection_closed_form(const TruncatedPotential& p, const Zeta& zeta, NormalizationCase c) {
  const double M = p.M();
  const cplx z = zeta.z;
  const cplx k = principal_sqrt(z);
  const auto s0 = initial_conditions(c, zeta.w);
  const auto rhs = [&p, z](double x, const ode::State<5>& y) {
    const cplx q = p(x) - z;
    return ode::State<5>{y[1], q * y[0], y[3], q * y[2], y[0]};
  };
  const auto y = ode::integrate<5>(rhs, 0.0, M, {s0.u, s0.du, s0.v, s0.dv, 0.0}, tight_propagation().ode);
  return y[4] * (y[3] - I * k * y[2] - I * y[0]) / (-2.0 * I * k) * std::exp(-I * k * M);
}

struct CauchyRiemannReport {
  double max_residual = 0.0;  // max |i D_x R - D_y R| / |D_x R| over the stencil
  int points = 0;
};

/// 5 x 5 stencil  center + (a + i b) r / 4, a, b in {-2..2}, central
/// differences with step 1e-4 r.
inline CauchyRiemannReport cauchy_riemann_proxy(const TruncatedPotential& p, cplx center, double r,
                                                unsigned threads = 0) {
  const ScatteringOptions so = [] {
    ScatteringOptions s;
    s.ode.rtol = 1e-13;
    s.ode.atol = 1e-16;
    return s;
  }();
  const double d = 1e-4 * r;
  std::vector<double> res(25, 0.0);
  parallel_for(25, threads, [&](std::size_t idx) {
    const int a = static_cast<int>(idx % 5) - 2, b = static_cast<int>(idx / 5) - 2;
    const cplx z = center + cplx(a, b) * (r / 4.0);
    const auto R = [&](cplx q) { return compute_rt(p, q, so).R; };
    const cplx Dx = (R(z + d) - R(z - d)) / (2.0 * d);
    const cplx Dy = (R(z + I * d) - R(z - I * d)) / (2.0 * d);
    res[idx] = std::abs(I * Dx - Dy) / std::abs(Dx);
  });
  return {*std::max_element(res.begin(), res.end()), 25};
}

struct GammaSamples {
  double sup_R = 0.0, sup_dR = 0.0;
  double median_R = 0.0;
  cplx R_center{}, dR_center{};
  int points = 0;
  double closest_to_pole = 0.0;  // distance from z_X to the nearest sample
};

/// R and dR/dz on 64 boundary points of the disk plus its center.
inline GammaSamples sample_gamma(const TruncatedPotential& p, cplx center, double r, cplx pole,
                                 unsigned threads = 0) {
  ScatteringOptions so;
  so.derivative = true;
  so.ode.rtol = 1e-12;
  so.ode.atol = 1e-15;
  constexpr int n = 64;
  std::vector<cplx> zs{center};
  for (int j = 0; j < n; ++j) zs.push_back(center + r * std::exp(I * (2.0 * pi * j / n)));
  std::vector<ScatteringCoefficients> out(zs.size());
  parallel_for(zs.size(), threads, [&](std::size_t i) { out[i] = compute_rt(p, zs[i], so); });
  GammaSamples g;
  g.points = static_cast<int>(zs.size());
  g.R_center = out[0].R;
  g.dR_center = *out[0].dR;
  std::vector<double> mags;
  g.closest_to_pole = std::abs(zs[0] - pole);
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.sup_R = std::max(g.sup_R, std::abs(out[i].R));
    g.sup_dR = std::max(g.sup_dR, std::abs(*out[i].dR));
    mags.push_back(std::abs(out[i].R));
    g.closest_to_pole = std::min(g.closest_to_pole, std::abs(zs[i] - pole));
  }
  std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
  g.median_R = mags[mags.size() / 2];
  return g;
}

struct ComparisonReport {
  double M = 0.0;
  double E = 0.0;
  double k = 0.0;
  LocatedState Y, X;
  AsymptoticLocations asym;
  cplx N_eta{};
  double im_gap_predicted = 0.0;  // Im z_Y - Im z_X to leading order
  double im_gap_observed = 0.0;
  double gap_relative_error = 0.0;
  double distance_quotient = 0.0;
  bool quotient_hypothesis = false;  // quotient < 2 - e^{-3kM}
  double gamma_radius = 0.0;
  GammaSamples gamma;
  CauchyRiemannReport cauchy_riemann;
  cplx R_at_zY{};
  double asym_error_ratio = 0.0;  // |z_Y - asym z_Y| / |z_Y - E|
};

struct ComparisonOptions {
  LocateOptions locate{};
  bool sample_gamma = true;
  bool cauchy_riemann = true;
  unsigned threads = 0;
};

inline ComparisonReport comparison_report(const EtaData& eta, const TruncatedPotential& p,
                                          const ComparisonOptions& o = {}) {
  ComparisonReport r;
  r.M = p.M();
  r.E = eta.E;
  r.k = eta.k;
  r.Y = locate_state(eta, p, ThetaMode::ZeroReflection, o.locate);
  r.X = locate_state(eta, p, ThetaMode::Resonance, o.locate);
  const auto bd = integrate_fundamentals(p, eta.eta(), eta.norm_case, tight_propagation());
  r.N_eta = theta_jacobian(bd, ThetaMode::ZeroReflection).det();
  r.asym = asymptotic_locations(bd, eta.E);
  r.im_gap_predicted = r.asym.im_gap;
  r.im_gap_observed = r.Y.zeta.z.imag() - r.X.zeta.z.imag();
  r.gap_relative_error = std::abs(r.im_gap_observed - r.im_gap_predicted) / std::abs(r.im_gap_predicted);
  r.distance_quotient = r.asym.distance_quotient();
  r.quotient_hypothesis = r.distance_quotient < 2.0 - std::exp(-3.0 * eta.k * r.M);
  r.gamma_radius = std::abs(r.X.zeta.z.imag() - r.Y.zeta.z.imag());
  r.asym_error_ratio = std::abs(r.Y.zeta.z - r.asym.z_Y) / std::abs(r.Y.zeta.z - eta.E);
  ScatteringOptions so;
  so.ode.rtol = 1e-13;
  so.ode.atol = 1e-16;
  r.R_at_zY = compute_rt(p, r.Y.zeta.z, so).R;
  if (o.sample_gamma) r.gamma = sample_gamma(p, r.Y.zeta.z, r.gamma_radius, r.X.zeta.z, o.threads);
  if (o.cauchy_riemann) r.cauchy_riemann = cauchy_riemann_proxy(p, r.Y.zeta.z, r.gamma_radius, o.threads);
  return r;
}

// ---------------------------------------------------------------------------

/// Least-squares slope of ys against xs.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InputError("fit_slope: need >= 2 matching points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline nlohmann::json cplx_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json to_json(const LocatedState& s) {
  return {{"mode", to_string(s.mode)},
          {"method", to_string(s.method)},
          {"eta", {{"w", cplx_json(s.eta.w)}, {"z", cplx_json(s.eta.z)}}},
          {"zeta", {{"w", cplx_json(s.zeta.w)}, {"z", cplx_json(s.zeta.z)}}},
          {"residual", {{"theta_plus", cplx_json(s.residual.plus)}, {"theta_minus", cplx_json(s.residual.minus)}}},
          {"iterations", s.iterations},
          {"step_sizes", s.step_sizes},
          {"ball_radius", s.ball_radius},
          {"distance", s.distance},
          {"z_distance", s.z_distance},
          {"in_ball", s.in_ball},
          {"in_safety_ball", s.in_safety_ball}};
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  return {{"M", r.M},
          {"E", r.E},
          {"k", r.k},
          {"z_Y", cplx_json(r.Y.zeta.z)},
          {"w_Y", cplx_json(r.Y.zeta.w)},
          {"z_X", cplx_json(r.X.zeta.z)},
          {"asym_z_Y", cplx_json(r.asym.z_Y)},
          {"asym_w_Y", cplx_json(r.asym.w_Y)},
          {"asym_z_X", cplx_json(r.asym.z_X)},
          {"split_agreement_Y", r.asym.agreement_Y},
          {"split_agreement_X", r.asym.agreement_X},
          {"N_eta", cplx_json(r.N_eta)},
          {"im_gap_predicted", r.im_gap_predicted},
          {"im_gap_observed", r.im_gap_observed},
          {"gap_relative_error", r.gap_relative_error},
          {"distance_quotient", r.distance_quotient},
          {"gamma_bounds_asserted", r.quotient_hypothesis},
          {"gamma_radius", r.gamma_radius},
          {"sup_R_on_gamma", r.gamma.sup_R},
          {"sup_dR_on_gamma", r.gamma.sup_dR},
          {"median_R_on_gamma", r.gamma.median_R},
          {"cauchy_riemann_residual", r.cauchy_riemann.max_residual},
          {"R_at_z_Y", cplx_json(r.R_at_zY)},
          {"asym_error_ratio", r.asym_error_ratio},
          {"zero_reflection", to_json(r.Y)},
          {"resonance", to_json(r.X)}};
}

} // namespace trscat
