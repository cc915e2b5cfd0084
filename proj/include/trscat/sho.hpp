#pragma once

// Truncated harmonic oscillator V = x^2 (optionally shifted by a constant):
// closed-form bound states, the series for the growing fundamental solution
// and the zero-reflection/resonance search around eta_n = (0, 2n + 1).

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "trscat/core.hpp"
#include "trscat/locator.hpp"
#include "trscat/potential.hpp"
#include "trscat/propagate.hpp"

namespace trscat {

/// Phi_n = p_n(x) e^{-x^2/2}, p_n the Hermite polynomial rescaled so that
/// Phi_n(0) = 1 (n even) or Phi_n'(0) = 1 (n odd).
struct HermiteState {
  int n = 0;
  double E = 1.0;
  std::vector<double> coeffs;  // p_n(x) = sum coeffs[j] x^j
  double scale = 1.0;          // p_n = scale * H_n (physicists' convention)

  bool even() const { return n % 2 == 0; }
  NormalizationCase norm_case() const { return even() ? NormalizationCase::NonNodal : NormalizationCase::Nodal; }

  double poly(double x) const {
    double s = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) s = s * x + coeffs[j];
    return s;
  }
  double dpoly(double x) const {
    double s = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) s = s * x + static_cast<double>(j) * coeffs[j];
    return s;
  }
  double phi(double x) const { return poly(x) * std::exp(-0.5 * x * x); }
  double dphi(double x) const { return (dpoly(x) - x * poly(x)) * std::exp(-0.5 * x * x); }
  /// from the equation itself
  double d2phi(double x) const { return (x * x - E) * phi(x); }
};

inline HermiteState sho_bound_state(int n) {
  if (n < 0) throw InputError("sho_bound_state: n must be >= 0");
  std::vector<double> prev{1.0}, cur{1.0};
  if (n >= 1) cur = {0.0, 2.0};
  for (int m = 1; m < n; ++m) {
    // H_{m+1} = 2x H_m - 2m H_{m-1}
    std::vector<double> next(cur.size() + 1, 0.0);
    for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += 2.0 * cur[j];
    for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= 2.0 * m * prev[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  HermiteState h;
  h.n = n;
  h.E = 2.0 * n + 1.0;
  h.scale = 1.0 / (n % 2 == 0 ? cur[0] : cur[1]);
  h.coeffs = cur;
  for (double& c : h.coeffs) c *= h.scale;
  return h;
}

/// v_eta_n = sign * e^{x^2/2} sum a_k x^k with
/// a_{k+2} = -2(k + n + 1)/((k + 2)(k + 1)) a_k, a_0 = [n odd], a_1 = [n even].
/// sign = -1 for odd n so that v(0) = -1 as the nodal initial data require.
struct SeriesSolution {
  int n = 0;
  double M = 0.0;
  std::vector<long double> a;
  double sign = 1.0;
  double tail = 0.0;  // |a_K M^K| / |sum a_k M^k|

  long double series(double x) const {
    long double s = 0.0L;
    for (std::size_t j = a.size(); j-- > 0;) s = s * x + a[j];
    return s;
  }
  long double dseries(double x) const {
    long double s = 0.0L;
    for (std::size_t j = a.size(); j-- > 1;) s = s * x + static_cast<long double>(j) * a[j];
    return s;
  }
  double v(double x) const {
    check(x);
    return sign * static_cast<double>(std::exp(0.5L * x * x) * series(x));
  }
  double dv(double x) const {
    check(x);
    return sign * static_cast<double>(std::exp(0.5L * x * x) * (dseries(x) + x * series(x)));
  }

 private:
  void check(double x) const {
    if (std::abs(x) > M * (1.0 + 1e-12)) throw InputError("SeriesSolution: |x| exceeds the truncation radius");
  }
};

inline SeriesSolution sho_series(int n, double M, int max_terms = 4000) {
  if (n < 0) throw InputError("sho_series: n must be >= 0");
  if (!(M > 0.0)) throw InputError("sho_series: M must be positive");
  SeriesSolution s;
  s.n = n;
  s.M = M;
  s.sign = n % 2 == 0 ? 1.0 : -1.0;
  s.a = {n % 2 == 0 ? 0.0L : 1.0L, n % 2 == 0 ? 1.0L : 0.0L};
  // the series cancels heavily (largest term ~ e^{M^2} times the sum), so
  // the tail is measured against the signed sum, not the sum of magnitudes
  long double value = s.a[0] + s.a[1] * M;
  long double power = M;
  for (int k = 0; k + 2 < max_terms; ++k) {
    const long double next = -2.0L * (k + n + 1) / ((k + 2.0L) * (k + 1.0L)) * s.a[k];
    s.a.push_back(next);
    power *= M;
    const long double term = std::abs(next) * power;
    value += next * power;
    const int K = k + 2;
    // every other coefficient is zero; test the nonzero ones past the peak term
    if (K >= 64 && next != 0.0L && K > 2.0 * M * M && term < 1e-16L * std::abs(value)) {
      s.tail = static_cast<double>(term / std::abs(value));
      return s;
    }
  }
  throw DomainError("sho_series: tail bound not reached within the term budget");
}

inline Zeta sho_eta(int n, double offset = 0.0) { return Zeta{0.0, 2.0 * n + 1.0 + offset}; }

/// V = offset + x^2 truncated at M.
inline TruncatedPotential sho_potential(double M, double offset = 0.0) {
  return TruncatedPotential(PotentialSpec::harmonic(offset), M);
}

inline double sho_ball_radius(int n, double M) { return std::pow(M, -(n + 2.0)) * std::exp(-0.5 * M * M); }

inline LocatedState sho_locate(int n, double M, ThetaMode mode, double offset = 0.0, LocateOptions o = {}) {
  if (!(M > 0.0)) throw InputError("sho_locate: M must be positive");
  const auto h = sho_bound_state(n);
  o.ball_radius = sho_ball_radius(n, M);
  // k only enters the default radius, which is overridden
  return locate_state(sho_potential(M, offset), sho_eta(n, offset), h.norm_case(), 0.0, mode, o);
}

/// Fitted-constant quotients for the growth/decay estimates at the truncation edge.
struct ShoScaling {
  double M = 0.0;
  double N_over = 0.0;       // |N(eta_n)| / (M e^{M^2/2})
  double dzTheta_over = 0.0;  // max |d_z Theta^+-| / (M^{n+1} e^{M^2/2})
  double u_over = 0.0;        // max |u(+-M)| / (M^n e^{-M^2/2})
  double v_over = 0.0;        // max |v(+-M)| / e^{M^2/2}
  double distance_quotient = 0.0;
};

inline ShoScaling sho_scaling(int n, double M) {
  const auto h = sho_bound_state(n);
  const auto xi = xi_data(sho_potential(M), sho_eta(n), h.norm_case());
  const double g = std::exp(0.5 * M * M);
  ShoScaling s;
  s.M = M;
  s.N_over = std::abs(xi.N) / (M * g);
  s.dzTheta_over = std::max(std::abs(xi.J.dz_plus), std::abs(xi.J.dz_minus)) / (std::pow(M, n + 1) * g);
  s.u_over = std::max(std::abs(xi.bd.plus.u), std::abs(xi.bd.minus.u)) / (std::pow(M, n) / g);
  s.v_over = std::max(std::abs(xi.bd.plus.v), std::abs(xi.bd.minus.v)) / g;
  s.distance_quotient = asymptotic_locations(xi.bd, h.E).distance_quotient();
  return s;
}

inline nlohmann::json to_json(const HermiteState& h) {
  return {{"n", h.n}, {"E", h.E}, {"parity", h.even() ? "even" : "odd"}, {"coefficients", h.coeffs},
          {"hermite_scale", h.scale}};
}

} // namespace trscat
