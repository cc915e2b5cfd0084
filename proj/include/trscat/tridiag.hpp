#pragma once

// Banded LU with partial pivoting for tridiagonal systems. Row swaps create
// one extra super-diagonal, so the factor is stored as three upper bands.

#include <cmath>
#include <vector>

#include "trscat/core.hpp"

namespace trscat {

/// Solve  sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]  (sub[0], sup[n-1] unused).
/// Exactly singular pivots are nudged to `tiny` (inverse iteration relies on this).
template <class T>
std::vector<T> solve_tridiagonal(std::vector<T> sub, std::vector<T> diag, std::vector<T> sup,
                                 std::vector<T> rhs, double tiny = 0.0) {
  const std::size_t n = diag.size();
  if (n == 0) return {};
  std::vector<T> sup2(n, T{});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // rows i and i+1 compete for the pivot in column i
    if (std::abs(sub[i + 1]) > std::abs(diag[i])) {
      std::swap(diag[i], sub[i + 1]);
      std::swap(sup[i], diag[i + 1]);
      if (i + 2 < n) std::swap(sup2[i], sup[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (std::abs(diag[i]) == 0.0) {
      if (tiny == 0.0) throw DomainError("tridiagonal solve: singular matrix");
      diag[i] = tiny;
    }
    const T m = sub[i + 1] / diag[i];
    diag[i + 1] -= m * sup[i];
    if (i + 2 < n) sup[i + 1] -= m * sup2[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (std::abs(diag[n - 1]) == 0.0) {
    if (tiny == 0.0) throw DomainError("tridiagonal solve: singular matrix");
    diag[n - 1] = tiny;
  }
  std::vector<T> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  if (n >= 2) x[n - 2] = (rhs[n - 2] - sup[n - 2] * x[n - 1]) / diag[n - 2];
  for (std::size_t k = n - 2; k-- > 0;)
    x[k] = (rhs[k] - sup[k] * x[k + 1] - sup2[k] * x[k + 2]) / diag[k];
  return x;
}

} // namespace trscat
