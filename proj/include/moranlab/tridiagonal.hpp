#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace moranlab {

// Solves a tridiagonal system by the Thomas algorithm:
//   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
// lower[0] and upper[n-1] are ignored. Intended for diagonally dominant
// systems (no pivoting). Throws DomainError on a vanishing pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

}  // namespace moranlab
