#pragma once

// Finite-difference scattering oracle: second-order central differences on a
// uniform grid with discrete plane-wave radiation rows at both ends.

#include <cmath>
#include <vector>

#include "trscat/core.hpp"
#include "trscat/parallel.hpp"
#include "trscat/potential.hpp"
#include "trscat/scattering.hpp"
#include "trscat/tridiag.hpp"

namespace trscat {

struct OracleOptions {
  double h = 1e-3;
  double padding = 0.5;  // L = M + padding, rounded to the grid
};

/// R, T at real z > 0. Nodes x_j = -L + j h with +-M on the grid; the node
/// sitting on a truncation edge takes the mean of the one-sided limits.
inline ScatteringCoefficients oracle_rt(const TruncatedPotential& p, double z, const OracleOptions& o = {}) {
  if (!(z > 0.0)) throw DomainError("oracle_rt: requires z > 0");
  if (!(o.h > 0.0)) throw InputError("oracle_rt: grid step must be positive");
  if (std::sqrt(z) * o.h >= 0.1)
    throw DomainError("oracle_rt: wavelength under-resolved (h sqrt(z) >= 0.1)");
  const double h = o.h;
  const double M = p.M();
  const long nM = std::lround(M / h);
  if (std::abs(static_cast<double>(nM) * h - M) > 1e-9 * std::max(1.0, M))
    throw InputError("oracle_rt: M must be a multiple of the grid step");
  const long pad = std::max<long>(2, std::lround(o.padding / h));
  const long nL = nM + pad;
  const double L = static_cast<double>(nL) * h;
  const auto n = static_cast<std::size_t>(2 * nL + 1);

  const double kap = 2.0 / h * std::asin(std::sqrt(z) * h / 2.0);
  const cplx ep = std::exp(I * kap * h), en = 1.0 / ep;
  const double x0 = -L, xN = L;

  std::vector<cplx> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
  const double ih2 = 1.0 / (h * h);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const long jj = static_cast<long>(j) - nL;
    double v;
    if (std::labs(jj) == nM) v = 0.5 * p.inner()(jj * h);
    else v = p(static_cast<double>(jj) * h);
    sub[j] = -ih2;
    sup[j] = -ih2;
    diag[j] = 2.0 * ih2 + v - z;
  }
  // left: psi_1 - e^{-i kap h} psi_0 = e^{i kap x0} (e^{i kap h} - e^{-i kap h})
  diag[0] = -en;
  sup[0] = 1.0;
  rhs[0] = std::exp(I * kap * x0) * (ep - en);
  // right: psi_N - e^{i kap h} psi_{N-1} = 0
  sub[n - 1] = -ep;
  diag[n - 1] = 1.0;

  const auto psi = solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), std::move(rhs));
  ScatteringCoefficients out;
  out.z = z;
  out.R = (psi[0] - std::exp(I * kap * x0)) * std::exp(I * kap * x0);
  out.T = psi[n - 1] * std::exp(-I * kap * xN);
  out.branch = "lattice";
  return out;
}

inline std::vector<ScatteringCoefficients> oracle_scan(const TruncatedPotential& p, double lo, double hi,
                                                       std::size_t n, const OracleOptions& o = {},
                                                       unsigned threads = 0) {
  const auto grid = energy_grid(lo, hi, n);
  std::vector<ScatteringCoefficients> rows(n);
  parallel_for(n, threads, [&](std::size_t i) { rows[i] = oracle_rt(p, grid[i], o); });
  return rows;
}

} // namespace trscat
