#include "moranlab/tridiagonal.hpp"

#include <cmath>

#include "moranlab/errors.hpp"

namespace moranlab {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw ParameterError("solve_tridiagonal: band lengths differ");
  }
  std::vector<double> c(n, 0.0);
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double sub = i > 0 ? lower[i] : 0.0;
    const double pivot = diag[i] - (i > 0 ? sub * c[i - 1] : 0.0);
    if (!(std::abs(pivot) > 1e-300)) throw DomainError("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    x[i] = (rhs[i] - (i > 0 ? sub * x[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = n; i-- > 1;) x[i - 1] -= c[i - 1] * x[i];
  return x;
}

}  // namespace moranlab
