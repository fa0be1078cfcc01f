#ifndef GOODDEAL_CONTROL_HPP
#define GOODDEAL_CONTROL_HPP

/**
 * @file control.hpp
 * @brief Node-wise static optimization of the jump kernel eta.
 *
 * At a fixed (t, x, i) the good-deal HJB reduces to
 *
 *   sup / inf  sum_{j != i} g_ij (1 + eta_ij) (V_j - V_i)
 *   s.t.       eta_ij >= -1,   sum_{j != i} g_ij eta_ij^2 <= B - h(i)^2.
 *
 * The objective is linear in eta, so the quadratic constraint is active
 * unless every unpinned gap is zero. Closed forms exist for 2 and 3
 * regimes; the general solver enumerates all 2^(D-1) pinning patterns.
 */

#include <span>
#include <vector>

#include "gooddeal/market.hpp"

namespace gooddeal {

enum class Direction { Upper, Lower };

const char* to_string(Direction direction) noexcept;

/// Static problem at one node, seen from regime `regime`. `rates` and
/// `gaps` list the other regimes j != i in increasing order.
struct StaticProblem {
  Direction direction = Direction::Upper;
  Regime regime{1};
  double budget = 0.0;         ///< B - h(i)^2
  std::vector<double> rates;   ///< g_ij, j != i
  std::vector<double> gaps;    ///< V(t,x,j) - V(t,x,i), j != i
};

struct KernelSolution {
  std::vector<double> eta;  ///< eta_ij, j != i, same order as the problem
  double objective = 0.0;   ///< sum g_ij (1 + eta_ij) gap_j at the optimum
};

/// Slack allowed on sum g_ij eta_ij^2 <= budget.
inline constexpr double kQuadraticSlack = 1e-9;

/// Two regimes: sign rule with B~ = sqrt(budget / g_ij). A zero gap yields eta = 0.
KernelSolution solve_two_state(const StaticProblem& problem);

/// Three regimes: best feasible of the four KKT candidate pairs
/// (-1,-1), (+-B~_j, -1), (-1, +-B~_k) and the interior pair.
KernelSolution solve_three_state(const StaticProblem& problem);

/// Any number of regimes: enumerates every subset of components pinned at -1.
KernelSolution solve_general(const StaticProblem& problem);

/// Dispatches to the closed forms for 2 and 3 regimes, enumeration otherwise.
KernelSolution solve_static(const StaticProblem& problem);

/// Allocation-free entry point used by the PIDE engine. Writes eta into
/// `eta` (same length as `rates`) and returns the objective. Components with
/// g_ij = 0 are reported as 0. The budget must be nonnegative.
double optimize_kernel(Direction direction, double budget, std::span<const double> rates,
                       std::span<const double> gaps, std::span<double> eta);

/// sum g_ij (1 + eta_ij) gap_j.
double coupling_objective(std::span<const double> rates, std::span<const double> gaps,
                          std::span<const double> eta);

/// sum g_ij eta_ij^2.
double kernel_spend(std::span<const double> rates, std::span<const double> eta);

}  // namespace gooddeal

#endif  // GOODDEAL_CONTROL_HPP
