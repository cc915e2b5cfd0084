#pragma once

// Defect bound state: Dirichlet finite-difference spectrum, selection of the
// localized gap state, shooting refinement, and the normalization data
// eta = (w0, E) with tail decay rates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "trscat/core.hpp"
#include "trscat/ode.hpp"
#include "trscat/potential.hpp"
#include "trscat/propagate.hpp"
#include "trscat/tridiag.hpp"

namespace trscat {

/// Dirichlet FD discretisation of -d^2/dx^2 + V on [-L, L] and its spectrum.
/// Nodes x_j = -L + j h for j = 1 .. n-1.
class Spectrum {
public:
  template <class Pot>
  Spectrum(const Pot& V, double L, double h) : L_(L), h_(h) {
    if (!(L > 0.0) || !(h > 0.0) || h >= L)
      throw InputError("solve_dirichlet_spectrum: need L > 0 and 0 < h < L");
    const long n = std::lround(2.0 * L / h);
    if (std::abs(n * h - 2.0 * L) > 1e-9 * L)
      throw InputError("solve_dirichlet_spectrum: 2L must be a multiple of h");
    if (n < 3) throw InputError("solve_dirichlet_spectrum: grid too coarse");
    const auto m = static_cast<std::size_t>(n - 1);
    x_.resize(m);
    diag_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      x_[j] = -L + static_cast<double>(j + 1) * h;
      diag_[j] = 2.0 / (h * h) + V(x_[j]);
    }
    off_ = -1.0 / (h * h);

    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag_.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd e = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m - 1), off_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw DomainError("solve_dirichlet_spectrum: symmetric QL iteration did not converge");
    eigenvalues_.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
  }

  double L() const noexcept { return L_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return eigenvalues_.size(); }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

  /// Indices of eigenvalues in [lo, hi].
  std::vector<std::size_t> in_window(double lo, double hi) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < eigenvalues_.size(); ++i)
      if (eigenvalues_[i] >= lo && eigenvalues_[i] <= hi) idx.push_back(i);
    return idx;
  }

  /// l2-normalised eigenvector by inverse iteration at the computed eigenvalue.
  /// Sign fixed so that the largest-magnitude entry is positive.
  std::vector<double> eigenvector(std::size_t i) const {
    const double lam = eigenvalues_.at(i);
    const std::size_t m = diag_.size();
    const double scale = std::max(1.0, std::abs(lam));
    std::vector<double> sub(m, off_), sup(m, off_), dg(m);
    for (std::size_t j = 0; j < m; ++j) dg[j] = diag_[j] - lam;
    std::vector<double> v(m);
    // deterministic start with no special symmetry
    for (std::size_t j = 0; j < m; ++j) v[j] = 1.0 + 0.37 * std::sin(1.3 * static_cast<double>(j) + 0.2);
    for (int it = 0; it < 3; ++it) {
      v = solve_tridiagonal(sub, dg, sup, v, 1e-14 * scale);
      const double nrm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
      for (double& a : v) a /= nrm;
    }
    const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0.0)
      for (double& a : v) a = -a;
    return v;
  }

private:
  double L_, h_;
  std::vector<double> x_;
  std::vector<double> diag_;
  double off_ = 0.0;
  std::vector<double> eigenvalues_;
};

template <class Pot>
Spectrum solve_dirichlet_spectrum(const Pot& V, double L, double h) {
  return Spectrum(V, L, h);
}

/// A sampled real function on a uniform grid x_j = x0 + j h.
struct Sampled {
  double x0 = 0.0;
  double h = 0.0;
  std::vector<double> values;

  double x(std::size_t j) const { return x0 + static_cast<double>(j) * h; }
  double x_max() const { return x(values.size() - 1); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  /// Index of the node nearest to x (clamped).
  std::size_t nearest(double xv) const {
    const double j = std::round((xv - x0) / h);
    return static_cast<std::size_t>(std::clamp(j, 0.0, static_cast<double>(values.size() - 1)));
  }
};

struct DefectState {
  double E = 0.0;
  std::size_t index = 0;
  double mass_fraction = 0.0;
  Sampled phi;  // includes the Dirichlet end nodes (zeros)
};

/// Among eigenpairs with E in [lo, hi], the one with the largest mass fraction
/// inside |x| <= rho + 2; it must reach 0.9.
inline DefectState select_defect_state(const Spectrum& s, double lo, double hi, double rho) {
  if (!(lo < hi)) throw InputError("select_defect_state: empty window");
  const auto idx = s.in_window(lo, hi);
  if (idx.empty()) throw DomainError("select_defect_state: no eigenvalue in the window");
  DefectState best;
  best.mass_fraction = -1.0;
  for (std::size_t i : idx) {
    const auto v = s.eigenvector(i);
    double inner = 0.0, total = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      total += v[j] * v[j];
      if (std::abs(s.x()[j]) <= rho + 2.0) inner += v[j] * v[j];
    }
    const double frac = inner / total;
    if (frac > best.mass_fraction) {
      best.E = s.eigenvalues()[i];
      best.index = i;
      best.mass_fraction = frac;
      best.phi.x0 = -s.L();
      best.phi.h = s.h();
      best.phi.values.assign(1, 0.0);
      best.phi.values.insert(best.phi.values.end(), v.begin(), v.end());
      best.phi.values.push_back(0.0);
    }
  }
  if (best.mass_fraction < 0.9)
    throw DomainError("select_defect_state: no eigenvector in the window is localized (mass fraction " +
                      std::to_string(best.mass_fraction) + " < 0.9); the window holds band states");
  return best;
}

// ---------------------------------------------------------------------------
// Shooting refinement on the untruncated potential.

struct RefinedState {
  double E = 0.0;
  double w0 = 0.0;  // Phi'(0)/Phi(0), or Phi(0)/Phi'(0) in the nodal case (diagnostic)
  NormalizationCase norm_case = NormalizationCase::NonNodal;
  double shoot_radius = 0.0;
  double wronskian = 0.0;  // normalised mismatch at the root
  Sampled phi;             // normalised per case
};

namespace detail {

struct ShotPair {
  double l, dl, r, dr;  // left and right inward solutions and slopes at 0
};

template <class Pot>
ShotPair shoot(const Pot& V, double E, double Ls, const ode::Options& opt) {
  const auto rhs = [&V, E](double x, const ode::State<2>& y) {
    return ode::State<2>{y[1], (V(x) - E) * y[0]};
  };
  const auto r = ode::integrate<2>(rhs, Ls, 0.0, {0.0, -1e-12}, opt);
  const auto l = ode::integrate<2>(rhs, -Ls, 0.0, {0.0, 1e-12}, opt);
  return {l[0].real(), l[1].real(), r[0].real(), r[1].real()};
}

inline double normalized_mismatch(const ShotPair& s) {
  const double nl = std::hypot(s.l, s.dl), nr = std::hypot(s.r, s.dr);
  return (s.r / nr) * (s.dl / nl) - (s.dr / nr) * (s.l / nl);
}

} // namespace detail

/// Solve the bound-state problem on [-Ls, Ls] with Dirichlet ends by matching
/// inward integrations at 0. `E_guess` comes from the FD spectrum; the root
/// is bracketed within +-`bracket`.
template <class Pot>
RefinedState refine_bound_state(const Pot& V, double E_guess, double Ls, double bracket = 0.05,
                                double sample_half_width = 0.0, double sample_step = 0.01) {
  ode::Options opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-300;
  opt.max_step = 0.05;
  const auto f = [&](double E) { return detail::normalized_mismatch(detail::shoot(V, E, Ls, opt)); };

  double lo = E_guess - bracket, hi = E_guess + bracket;
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0) {
    // the mismatch changes sign once per eigenvalue; scan the bracket finer
    const int n = 40;
    bool found = false;
    double a = lo, fa = flo;
    for (int i = 1; i <= n && !found; ++i) {
      const double b = lo + (hi - lo) * i / n;
      const double fb = f(b);
      if (fa * fb <= 0.0 && std::abs(b - E_guess) <= bracket) {
        lo = a, flo = fa, hi = b, fhi = fb;
        found = true;
      }
      a = b, fa = fb;
    }
    if (!found) throw DomainError("refine_bound_state: no eigenvalue bracketed near the FD estimate");
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
  RefinedState out;
  out.E = 0.5 * (a + b);
  out.shoot_radius = Ls;
  const auto shot = detail::shoot(V, out.E, Ls, opt);
  out.wronskian = detail::normalized_mismatch(shot);

  // normalise each half so the pieces join at 0
  const double scale_l = std::hypot(shot.l, shot.dl), scale_r = std::hypot(shot.r, shot.dr);
  const double l0 = shot.l / scale_l, dl0 = shot.dl / scale_l;
  const double r0 = shot.r / scale_r, dr0 = shot.dr / scale_r;
  const double sgn = (l0 * r0 + dl0 * dr0) < 0.0 ? -1.0 : 1.0;
  const double phi0 = 0.5 * (l0 + sgn * r0), dphi0 = 0.5 * (dl0 + sgn * dr0);
  const double peak = std::hypot(phi0, dphi0);
  // a node at 0 is recognised by the value there compared with the slope
  out.norm_case = std::abs(phi0) >= 1e-6 * peak ? NormalizationCase::NonNodal : NormalizationCase::Nodal;
  const double norm = out.norm_case == NormalizationCase::NonNodal ? phi0 : dphi0;
  out.w0 = out.norm_case == NormalizationCase::NonNodal ? dphi0 / phi0 : 0.0;

  // samples on [-H, H] from the stable inward solutions
  const double H = sample_half_width > 0.0 ? std::min(sample_half_width, Ls) : Ls;
  const long half = std::lround(H / sample_step);
  out.phi.h = sample_step;
  out.phi.x0 = -static_cast<double>(half) * sample_step;
  out.phi.values.assign(static_cast<std::size_t>(2 * half + 1), 0.0);
  const auto rhs = [&V, E = out.E](double x, const ode::State<2>& y) {
    return ode::State<2>{y[1], (V(x) - E) * y[0]};
  };
  std::vector<double> pos, neg;
  for (long j = 1; j <= half; ++j) {
    pos.push_back(static_cast<double>(j) * sample_step);
    neg.push_back(-static_cast<double>(j) * sample_step);
  }
  // outward integration from 0 would pick up the growing solution, so the
  // samples come from the two inward runs
  std::reverse(pos.begin(), pos.end());
  std::reverse(neg.begin(), neg.end());
  const auto fill = [&](double from, double init_slope, const std::vector<double>& cps, double at0,
                        double s) {
    ode::integrate<2>(rhs, from, 0.0, ode::State<2>{0.0, init_slope}, opt, cps,
                      [&](double x, const ode::State<2>& y) {
                        if (x == from || x == 0.0) return;
                        out.phi.values[out.phi.nearest(x)] = s * y[0].real() / at0;
                      });
  };
  fill(Ls, -1e-12, pos, scale_r, sgn / norm);
  fill(-Ls, 1e-12, neg, scale_l, 1.0 / norm);
  out.phi.values[static_cast<std::size_t>(half)] = phi0 / norm;
  return out;
}

// ---------------------------------------------------------------------------

/// Bound-state package consumed by the locator.
struct EtaData {
  double E = 0.0;
  Sampled phi;
  NormalizationCase norm_case = NormalizationCase::NonNodal;
  double w0 = 0.0;
  double k_minus = 0.0, k_plus = 0.0, k = 0.0;
  double M = 0.0;
  double rho = 0.0;

  Zeta eta() const { return Zeta{w0, E}; }
};

namespace detail {

/// Slope of log(max |phi| per unit cell) against cell position over
/// |x| in [a, b] on one side.
inline double tail_decay_rate(const Sampled& phi, int side, double a, double b) {
  std::vector<double> xs, ys;
  for (double c = a; c + 1.0 <= b + 1e-9; c += 1.0) {
    double m = 0.0;
    double at = c;
    for (std::size_t j = 0; j < phi.values.size(); ++j) {
      const double s = side * phi.x(j);
      if (s >= c - 1e-12 && s < c + 1.0 - 1e-12 && std::abs(phi.values[j]) > m) {
        m = std::abs(phi.values[j]);
        at = s;
      }
    }
    if (m > 0.0) {
      xs.push_back(at);
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() < 2) throw DomainError("eta_data: tail window too short for a decay fit");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

} // namespace detail

/// Normalise Phi per case, read off w0 and fit the tail decay rates over
/// [rho + 1, M] on each side (unit period).
inline EtaData eta_data(double E, Sampled phi, double M, double rho) {
  if (phi.values.size() < 9) throw InputError("eta_data: too few samples");
  if (phi.x0 > -M + 1e-9 || phi.x_max() < M - 1e-9)
    throw InputError("eta_data: samples must cover [-M, M]");
  if (M - rho < 2.0)
    throw DomainError("eta_data: tail window too short (M - rho < 2 periods)");

  EtaData d;
  d.E = E;
  d.M = M;
  d.rho = rho;
  const std::size_t j0 = phi.nearest(0.0);
  if (std::abs(phi.x(j0)) > 1e-9 * phi.h) throw InputError("eta_data: grid must contain x = 0");
  if (j0 < 2 || j0 + 2 >= phi.values.size()) throw InputError("eta_data: grid too short around 0");
  const auto& f = phi.values;
  const double h = phi.h;
  const auto deriv = [&](std::size_t j) {  // fourth-order central difference
    return (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
  };
  const double peak = phi.max_abs();
  double scale;
  if (std::abs(f[j0]) >= 1e-6 * peak) {
    d.norm_case = NormalizationCase::NonNodal;
    scale = f[j0];
    d.w0 = deriv(j0) / scale;
  } else {
    d.norm_case = NormalizationCase::Nodal;
    scale = deriv(j0);
    d.w0 = 0.0;
  }
  for (double& v : phi.values) v /= scale;
  d.phi = std::move(phi);

  d.k_plus = detail::tail_decay_rate(d.phi, 1, rho + 1.0, M);
  d.k_minus = detail::tail_decay_rate(d.phi, -1, rho + 1.0, M);
  d.k = std::min(d.k_plus, d.k_minus);
  if (!(d.k > 0.0)) throw DomainError("eta_data: non-positive fitted decay rate");
  return d;
}

/// Full pipeline: FD spectrum on [-L, L], localized state in [lo, hi],
/// shooting refinement, then eta data with decay rates fitted over
/// [rho_core + 1, M_fit]. The refined w0 replaces the finite-difference one.
struct BoundStateOptions {
  double L = 12.0;
  double h = 0.005;
  double lo = 0.0, hi = 0.0;
  double M_fit = 10.0;
  bool refine = true;
  double sample_step = 0.005;
  std::optional<double> core_radius;  // overrides the defect radius at the core tolerance
};

struct BoundStateResult {
  DefectState fd;
  std::optional<RefinedState> refined;
  EtaData eta;
};

inline BoundStateResult compute_bound_state(const PotentialSpec& V, const BoundStateOptions& o) {
  const double rho_core = o.core_radius.value_or(V.defect_radius(kCoreTolerance));
  const Spectrum s(V, o.L, o.h);
  BoundStateResult r;
  r.fd = select_defect_state(s, o.lo, o.hi, rho_core);
  if (!o.refine) {
    r.eta = eta_data(r.fd.E, r.fd.phi, o.M_fit, rho_core);
    return r;
  }
  // first pass on the FD box to get a decay estimate, then push the Dirichlet
  // walls far enough out that they no longer shift E
  auto first = refine_bound_state(V, r.fd.E, o.L, 0.05, std::max(o.L, o.M_fit), o.sample_step);
  double k_rough = 0.0;
  try {
    k_rough = eta_data(first.E, first.phi, std::min(o.M_fit, o.L), rho_core).k;
  } catch (const DomainError&) {
    k_rough = 0.0;
  }
  // only slowly decaying states need the walls moved
  const double edge = std::max(std::abs(first.phi.values[first.phi.nearest(-o.L + 1.0)]),
                               std::abs(first.phi.values[first.phi.nearest(o.L - 1.0)]));
  const bool extend = k_rough > 0.0 && edge > 1e-8 * first.phi.max_abs();
  const double Ls = extend ? std::min(std::max(o.L, o.M_fit) + 20.0 / k_rough, 200.0) : o.L;
  auto second = refine_bound_state(V, first.E, Ls, 0.01, std::max(o.L, o.M_fit) + 2.0, o.sample_step);
  r.eta = eta_data(second.E, second.phi, o.M_fit, rho_core);
  r.eta.w0 = second.w0;
  r.eta.norm_case = second.norm_case;
  r.refined = std::move(second);
  return r;
}

inline nlohmann::json to_json(const EtaData& d, bool with_samples = true) {
  nlohmann::json j{{"E", d.E},         {"case", to_string(d.norm_case)}, {"w0", d.w0},
                   {"k_minus", d.k_minus}, {"k_plus", d.k_plus},       {"k", d.k},
                   {"M", d.M},         {"rho", d.rho}};
  if (with_samples) j["phi"] = {{"x0", d.phi.x0}, {"h", d.phi.h}, {"values", d.phi.values}};
  return j;
}

inline EtaData eta_from_json(const nlohmann::json& j) {
  try {
    EtaData d;
    d.E = j.at("E").get<double>();
    const auto c = j.at("case").get<std::string>();
    if (c != "nodal" && c != "non_nodal") throw InputError("eta: unknown case '" + c + "'");
    d.norm_case = c == "nodal" ? NormalizationCase::Nodal : NormalizationCase::NonNodal;
    d.w0 = j.at("w0").get<double>();
    d.k_minus = j.at("k_minus").get<double>();
    d.k_plus = j.at("k_plus").get<double>();
    d.k = j.at("k").get<double>();
    d.M = j.value("M", 0.0);
    d.rho = j.value("rho", 0.0);
    if (j.contains("phi")) {
      d.phi.x0 = j["phi"].at("x0").get<double>();
      d.phi.h = j["phi"].at("h").get<double>();
      d.phi.values = j["phi"].at("values").get<std::vector<double>>();
    }
    if (!(d.k > 0.0)) throw InputError("eta: k must be positive");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed eta file: ") + e.what());
  }
}

} // namespace trscat
