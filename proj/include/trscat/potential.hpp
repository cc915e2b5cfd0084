#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <json.hpp>

#include "trscat/core.hpp"
#include "trscat/expression.hpp"

namespace trscat {

/// Tolerance defining the effective support radius of an exponentially
/// decaying defect.
inline constexpr double kDefectTolerance = 1e-8;

/// Coarser tolerance for the "core" of the defect, used to place decay-rate
/// fit windows and localization tests.
inline constexpr double kCoreTolerance = 1e-3;

struct CosineTerm {
  double amplitude = 0.0;
  double frequency = 0.0; // in units of 2*pi: cos(2*pi*frequency*x)
};

/// V = c0 + sum a_i cos(2 pi f_i x) + b tanh(x) cos(2 pi f_d x)
struct CosineDefect {
  double c0 = 0.0;
  std::vector<CosineTerm> terms;
  double defect_amplitude = 0.0;
  double defect_frequency = 0.0;

  double operator()(double x) const {
    double v = c0;
    for (const auto& t : terms) v += t.amplitude * std::cos(2.0 * pi * t.frequency * x);
    return v + defect_amplitude * std::tanh(x) * std::cos(2.0 * pi * defect_frequency * x);
  }

  /// Periodic background reached as x -> -inf (side < 0) or x -> +inf.
  double background(int side, double x) const {
    double v = c0;
    for (const auto& t : terms) v += t.amplitude * std::cos(2.0 * pi * t.frequency * x);
    return v + (side < 0 ? -1.0 : 1.0) * defect_amplitude *
                   std::cos(2.0 * pi * defect_frequency * x);
  }
};

/// V = c0 + x^2
struct HarmonicOffset {
  double c0 = 0.0;
  double operator()(double x) const { return c0 + x * x; }
};

/// V = depth everywhere; truncation turns it into a square well/barrier.
struct SquareWell {
  double depth = 0.0;
  double operator()(double) const { return depth; }
};

struct ExpressionPotential {
  Expression expr;
  double operator()(double x) const { return expr(x); }
};

/// Values on a uniform grid x_j = x0 + j*step, cubic B-spline in between
/// and clamped to the end values outside.
struct SampledPotential {
  double step = 0.0;
  double x0 = 0.0;
  std::vector<double> values;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;

  SampledPotential(double h, std::vector<double> v, std::optional<double> origin = std::nullopt)
      : step(h), values(std::move(v)) {
    if (!(step > 0.0)) throw InputError("sampled potential needs step > 0");
    if (values.size() < 4) throw InputError("sampled potential needs at least 4 values");
    x0 = origin.value_or(-0.5 * step * static_cast<double>(values.size() - 1));
    spline = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), x0, step);
  }

  double x_max() const { return x0 + step * static_cast<double>(values.size() - 1); }

  double operator()(double x) const {
    if (x <= x0) return values.front();
    if (x >= x_max()) return values.back();
    return (*spline)(x);
  }
};

namespace detail {

/// Least-squares Fourier fit (period 1) on [a, b]; returns the fitted function.
template <class F>
auto periodic_fit(const F& f, double a, double b, int harmonics = 12) {
  const int n = static_cast<int>(std::ceil((b - a) * 64.0)) + 1;
  const int cols = 2 * harmonics + 1;
  Eigen::MatrixXd A(n, cols);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    A(i, 0) = 1.0;
    for (int m = 1; m <= harmonics; ++m) {
      A(i, 2 * m - 1) = std::cos(2.0 * pi * m * x);
      A(i, 2 * m) = std::sin(2.0 * pi * m * x);
    }
    y(i) = f(x);
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  return [c, harmonics](double x) {
    double v = c(0);
    for (int m = 1; m <= harmonics; ++m)
      v += c(2 * m - 1) * std::cos(2.0 * pi * m * x) + c(2 * m) * std::sin(2.0 * pi * m * x);
    return v;
  };
}

/// Smallest r such that |f - fit| < tol on r < |x| <= extent, where fit is a
/// periodic fit on the outermost four periods of each tail.
template <class F>
double fitted_defect_radius(const F& f, double extent, double tol) {
  const double window = std::min(4.0, 0.5 * extent);
  double rho = 0.0;
  for (int side : {-1, 1}) {
    const double lo = side > 0 ? extent - window : -extent;
    const double hi = side > 0 ? extent : -extent + window;
    const auto fit = periodic_fit(f, lo, hi);
    const int steps = static_cast<int>(std::ceil(extent * 64.0));
    for (int i = steps; i >= 0; --i) {
      const double r = extent * i / steps;
      const double x = side * r;
      if (std::abs(f(x) - fit(x)) >= tol) {
        rho = std::max(rho, r);
        break;
      }
    }
  }
  return rho;
}

} // namespace detail

/// An evaluable real potential on the whole line.
class PotentialSpec {
public:
  using Variant = std::variant<ExpressionPotential, CosineDefect, HarmonicOffset, SquareWell,
                               SampledPotential>;

  /// Half-width used to estimate the defect radius of expression potentials.
  static constexpr double kExpressionExtent = 30.0;

  explicit PotentialSpec(Variant v) : v_(std::move(v)) { rho_ = defect_radius(kDefectTolerance); }

  static PotentialSpec expression(std::string_view text) {
    return PotentialSpec(ExpressionPotential{Expression::parse(text)});
  }
  static PotentialSpec harmonic(double c0) { return PotentialSpec(HarmonicOffset{c0}); }
  static PotentialSpec square_well(double depth) { return PotentialSpec(SquareWell{depth}); }
  static PotentialSpec cosine_defect(CosineDefect c) { return PotentialSpec(std::move(c)); }

  double operator()(double x) const {
    return std::visit([x](const auto& p) { return p(x); }, v_);
  }

  /// Effective support radius of V_def at the default tolerance 1e-8.
  double rho() const noexcept { return rho_; }

  /// Smallest r beyond which V agrees with its periodic background(s) to tol.
  /// Confining and constant potentials report 0.
  double defect_radius(double tol) const {
    return std::visit(
        [tol](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, CosineDefect>) {
            const double b = std::abs(p.defect_amplitude);
            if (b < tol) return 0.0;
            // sup_{|x|>r} |b (tanh x -+ 1) cos| = b (1 - tanh r)
            return std::atanh(1.0 - tol / b);
          } else if constexpr (std::is_same_v<T, HarmonicOffset> || std::is_same_v<T, SquareWell>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, SampledPotential>) {
            const double extent = std::min(-p.x0, p.x_max());
            return detail::fitted_defect_radius(p, extent, tol);
          } else {
            return detail::fitted_defect_radius(p, kExpressionExtent, tol);
          }
        },
        v_);
  }

  const Variant& variant() const noexcept { return v_; }

  std::string kind() const {
    switch (v_.index()) {
      case 0: return "expression";
      case 1: return "cosine_defect";
      case 2: return "harmonic";
      case 3: return "square_well";
      default: return "sampled";
    }
  }

  /// Symmetric under x -> -x (exactly, by construction of the variant).
  bool is_even() const {
    if (const auto* c = std::get_if<CosineDefect>(&v_)) return c->defect_amplitude == 0.0;
    return std::holds_alternative<HarmonicOffset>(v_) || std::holds_alternative<SquareWell>(v_);
  }

private:
  Variant v_;
  double rho_ = 0.0;
};

/// V_trunc(x) = V(x) for |x| <= M and 0 otherwise.
class TruncatedPotential {
public:
  TruncatedPotential(PotentialSpec inner, double M) : inner_(std::move(inner)), M_(M) {
    if (!(M > 0.0) || !std::isfinite(M)) throw InputError("truncation M must be positive");
  }

  double operator()(double x) const { return std::abs(x) <= M_ ? inner_(x) : 0.0; }

  /// Same potential truncated at a different half-width.
  TruncatedPotential with_M(double M) const { return {inner_, M}; }

  /// Truncating again keeps the narrower window.
  TruncatedPotential truncate(double M) const { return {inner_, std::min(M_, M)}; }

  const PotentialSpec& inner() const noexcept { return inner_; }
  double M() const noexcept { return M_; }
  double rho() const noexcept { return inner_.rho(); }

  /// M > rho; exponentially decaying defects can violate this at the default
  /// 1e-8 tolerance while still being in the asymptotic regime.
  bool separates_defect() const noexcept { return M_ > inner_.rho(); }

private:
  PotentialSpec inner_;
  double M_;
};

/// V = 10 + 5 cos(4 pi x) + 5 tanh(x) cos(2 pi x): a gap state near E = 19.8.
inline PotentialSpec fig1_potential() {
  return PotentialSpec::cosine_defect(CosineDefect{10.0, {{5.0, 2.0}}, 5.0, 1.0});
}

// ---------------------------------------------------------------------------
// JSON config:  {"kind": ..., <fields>, "M": number}

inline PotentialSpec potential_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "expression") return PotentialSpec::expression(j.at("expression").get<std::string>());
    if (kind == "harmonic") return PotentialSpec::harmonic(j.value("c0", 0.0));
    if (kind == "square_well") return PotentialSpec::square_well(j.at("depth").get<double>());
    if (kind == "cosine_defect") {
      CosineDefect c;
      c.c0 = j.value("c0", 0.0);
      for (const auto& t : j.value("cos_terms", nlohmann::json::array()))
        c.terms.push_back({t.at("amplitude").get<double>(), t.at("frequency").get<double>()});
      c.defect_amplitude = j.value("defect_amplitude", 0.0);
      c.defect_frequency = j.value("defect_frequency", 0.0);
      return PotentialSpec::cosine_defect(std::move(c));
    }
    if (kind == "sampled") {
      std::optional<double> x0;
      if (j.contains("x0")) x0 = j.at("x0").get<double>();
      return PotentialSpec(SampledPotential(j.at("step").get<double>(),
                                            j.at("values").get<std::vector<double>>(), x0));
    }
    throw InputError("unknown potential kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed potential config: ") + e.what());
  }
}

inline TruncatedPotential truncated_from_json(const nlohmann::json& j) {
  if (!j.contains("M")) throw InputError("potential config needs \"M\"");
  return {potential_from_json(j), j.at("M").get<double>()};
}

inline nlohmann::json to_json(const PotentialSpec& p) {
  nlohmann::json j;
  j["kind"] = p.kind();
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExpressionPotential>) {
          j["expression"] = v.expr.source();
        } else if constexpr (std::is_same_v<T, CosineDefect>) {
          j["c0"] = v.c0;
          j["cos_terms"] = nlohmann::json::array();
          for (const auto& t : v.terms)
            j["cos_terms"].push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}});
          j["defect_amplitude"] = v.defect_amplitude;
          j["defect_frequency"] = v.defect_frequency;
        } else if constexpr (std::is_same_v<T, HarmonicOffset>) {
          j["c0"] = v.c0;
        } else if constexpr (std::is_same_v<T, SquareWell>) {
          j["depth"] = v.depth;
        } else {
          j["step"] = v.step;
          j["x0"] = v.x0;
          j["values"] = v.values;
        }
      },
      p.variant());
  j["rho"] = p.rho();
  return j;
}

inline nlohmann::json to_json(const TruncatedPotential& p) {
  auto j = to_json(p.inner());
  j["M"] = p.M();
  return j;
}

} // namespace trscat
