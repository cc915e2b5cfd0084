#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace trscat {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

/// Raised when an operation's mathematical preconditions are not met
/// (singular normalization, no bound state, non-convergence, ...).
/// The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad config, bad expression text, bad arguments.
/// The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Principal square root with Re >= 0. Rejects points on the cut
/// (Re z < 0, Im z == 0) where the two boundary values disagree.
inline cplx principal_sqrt(cplx z) {
  if (z.imag() == 0.0 && z.real() < 0.0)
    throw DomainError("sqrt(z) requested on the branch cut (negative real axis)");
  return std::sqrt(z);
}

template <class T>
constexpr T sqr(const T& v) { return v * v; }

} // namespace trscat
