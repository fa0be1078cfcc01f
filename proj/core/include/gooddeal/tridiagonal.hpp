#ifndef GOODDEAL_TRIDIAGONAL_HPP
#define GOODDEAL_TRIDIAGONAL_HPP

#include <span>

namespace gooddeal {

/// Solves a tridiagonal system in place by forward elimination and back
/// substitution (Thomas algorithm).
///
/// Row n reads  sub[n] x[n-1] + diag[n] x[n] + super[n] x[n+1] = rhs[n];
/// sub[0] and super[size-1] are ignored. On return `rhs` holds x.
/// `scratch` needs at least rhs.size() entries. Throws SolverError on a
/// zero or non-finite pivot.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs,
                       std::span<double> scratch);

}  // namespace gooddeal

#endif  // GOODDEAL_TRIDIAGONAL_HPP
