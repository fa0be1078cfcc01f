#include "gooddeal/tridiagonal.hpp"

#include <cmath>
#include <string>

#include "gooddeal/errors.hpp"

namespace gooddeal {

namespace {

void check_pivot(double pivot, std::size_t row) {
  if (pivot == 0.0 || !std::isfinite(pivot)) {
    throw SolverError("tridiagonal solve: singular pivot at row " + std::to_string(row));
  }
}

}  // namespace

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs,
                       std::span<double> scratch) {
  const std::size_t n = rhs.size();
  if (n == 0) return;
  if (sub.size() < n || diag.size() < n || super.size() < n || scratch.size() < n) {
    throw SolverError("tridiagonal solve: inconsistent band lengths");
  }

  double pivot = diag[0];
  check_pivot(pivot, 0);
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i] = super[i - 1] / pivot;
    pivot = diag[i] - sub[i] * scratch[i];
    check_pivot(pivot, i);
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] -= scratch[i + 1] * rhs[i + 1];
  }
}

}  // namespace gooddeal
