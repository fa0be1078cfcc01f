#ifndef GOODDEAL_SOLVER_HPP
#define GOODDEAL_SOLVER_HPP

/**
 * @file solver.hpp
 * @brief Fully implicit finite-difference engine for the good-deal PIDE.
 *
 * For each regime i the value function solves, backward from maturity,
 *
 *   V_t + r x V_x + 1/2 sigma^2 x^2 V_xx - r V
 *       + sum_{j != i} g_ij (1 + eta_ij) (V_j - V_i) = 0,
 *
 * where eta is either fixed (linear PIDE, e.g. eta = 0 for the minimal
 * martingale measure) or chosen node-wise by the static optimizer
 * (upper / lower good-deal functions). Each time step is backward Euler;
 * the control and the regime coupling are resolved by policy iteration
 * with Gauss-Seidel sweeps over regimes.
 */

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gooddeal/control.hpp"
#include "gooddeal/market.hpp"

namespace gooddeal {

/// Uniform grid on [0, T] x [s_min, s_max].
class Grid {
 public:
  Grid(double maturity, int time_steps, double s_min, double s_max, int s_steps);

  /// Builds a grid from step sizes; T / dt and (s_max - s_min) / ds must be
  /// integers to within 1e-9 relative.
  static Grid from_spacing(double maturity, double dt, double s_min, double s_max, double ds);

  double maturity() const noexcept { return maturity_; }
  int time_steps() const noexcept { return time_steps_; }
  double dt() const noexcept { return maturity_ / time_steps_; }
  double s_min() const noexcept { return s_min_; }
  double s_max() const noexcept { return s_max_; }
  int s_steps() const noexcept { return s_steps_; }
  double ds() const noexcept { return (s_max_ - s_min_) / s_steps_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(s_steps_) + 1; }

  double node(std::size_t m) const noexcept { return s_min_ + static_cast<double>(m) * ds(); }
  double time(int k) const noexcept { return static_cast<double>(k) * dt(); }

  /// Same range with dt and ds halved.
  Grid refined() const;

 private:
  double maturity_;
  int time_steps_;
  double s_min_;
  double s_max_;
  int s_steps_;
};

/// European-style claim Phi(S(T), alpha(T)) with Dirichlet data at both ends
/// of the stock range.
struct Claim {
  std::string label;
  double maturity = 0.0;
  std::function<double(double x, Regime regime)> payoff;
  /// Value imposed at x = s_min and x = s_max when `tau` years remain.
  std::function<double(double tau, double x, const RegimeParams& params)> boundary;
};

/// max(x - K, 0); boundary max(x - K e^{-r(i) tau}, 0), i.e. 0 at x = 0 and
/// s_max - K e^{-r(i) tau} at the top of the grid.
Claim european_call(double strike, double maturity);

/// Pays nothing.
Claim zero_claim(double maturity);

/// Pays S(T); its price is S(0) under every martingale measure.
Claim stock_claim(double maturity);

/// V(t_k, x_m, i) for k = 0..time_steps, every node and regime.
class ValueSurface {
 public:
  ValueSurface(Grid grid, std::size_t regimes);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t regimes() const noexcept { return regimes_; }

  double operator()(int k, std::size_t m, std::size_t i) const {
    return values_[offset(k) + i * grid_.node_count() + m];
  }
  double& operator()(int k, std::size_t m, std::size_t i) {
    return values_[offset(k) + i * grid_.node_count() + m];
  }

  /// Time slice k, laid out regime-major: [i * node_count + m].
  std::span<const double> slice(int k) const {
    return {values_.data() + offset(k), slice_size()};
  }
  std::span<double> slice(int k) { return {values_.data() + offset(k), slice_size()}; }
  std::size_t slice_size() const noexcept { return regimes_ * grid_.node_count(); }

  /// Linear interpolation in x on time slice k. Throws ModelError outside
  /// [s_min, s_max].
  double interpolate(double x, Regime regime, int k = 0) const;

 private:
  std::size_t offset(int k) const { return static_cast<std::size_t>(k) * slice_size(); }

  Grid grid_;
  std::size_t regimes_;
  std::vector<double> values_;
};

/// eta_ij at every (k, m, i); entry (k, m, i, i) is 0. Slice k holds the
/// kernel used by the implicit step that produced V(t_k); the terminal
/// slice is all zeros.
class KernelField {
 public:
  KernelField(const Grid& grid, std::size_t regimes);

  double operator()(int k, std::size_t m, std::size_t i, std::size_t j) const {
    return eta_[index(k, m, i, j)];
  }
  double& operator()(int k, std::size_t m, std::size_t i, std::size_t j) {
    return eta_[index(k, m, i, j)];
  }

  std::span<double> slice(int k) { return {eta_.data() + index(k, 0, 0, 0), slice_size()}; }
  std::span<const double> slice(int k) const {
    return {eta_.data() + index(k, 0, 0, 0), slice_size()};
  }
  std::size_t slice_size() const noexcept { return regimes_ * nodes_ * regimes_; }
  int time_steps() const noexcept { return time_steps_; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t regimes() const noexcept { return regimes_; }

 private:
  std::size_t index(int k, std::size_t m, std::size_t i, std::size_t j) const {
    return static_cast<std::size_t>(k) * slice_size() + (i * nodes_ + m) * regimes_ + j;
  }

  int time_steps_;
  std::size_t nodes_;
  std::size_t regimes_;
  std::vector<double> eta_;
};

struct SolverOptions {
  double tolerance = 1e-10;  ///< sup-norm policy-iteration residual
  int max_iterations = 200;
  bool trace_residuals = false;  ///< keep the residual sequence of every step
};

struct SolveReport {
  ValueSurface surface;
  KernelField kernels;
  std::vector<int> policy_iterations;  ///< per time step k = 0..time_steps-1
  double max_policy_residual = 0.0;
  /// Per time step, residual after each iteration (only with trace_residuals).
  std::vector<std::vector<double>> residual_trace;
};

/// eta chosen node-wise by the static optimizer; budgets[i] = B - h(i)^2.
struct OptimizedKernel {
  Direction direction = Direction::Upper;
  std::vector<double> budgets;
};

/// Constant eta, row-major D x D (diagonal ignored).
struct FixedKernel {
  std::vector<double> eta;
};

using KernelPolicy = std::variant<OptimizedKernel, FixedKernel>;

struct StepResult {
  std::vector<double> values;  ///< regime-major slice, same layout as ValueSurface::slice
  std::vector<double> eta;     ///< [(i * nodes + m) * D + j]
  double residual = 0.0;       ///< sup |values - guess|
};

/// One implicit time step of the coupled system. Holds the time-independent
/// diffusion stencil for every regime. Accepts any D >= 1; the rate matrix
/// need not be a validated Generator.
class ImplicitStepper {
 public:
  ImplicitStepper(std::vector<RegimeParams> regimes, std::vector<double> rates, Grid grid,
                  KernelPolicy policy);

  std::size_t regimes() const noexcept { return regimes_.size(); }
  const Grid& grid() const noexcept { return grid_; }

  /// One policy iteration: eta from `guess`, then one Gauss-Seidel sweep of
  /// regime-wise tridiagonal solves. `lower` / `upper` hold the Dirichlet
  /// values per regime at this time level.
  StepResult iterate(std::span<const double> next, std::span<const double> guess,
                     std::span<const double> lower, std::span<const double> upper) const;

 private:
  void compute_kernel(std::span<const double> guess, std::span<double> eta) const;

  std::vector<RegimeParams> regimes_;
  std::vector<double> rates_;
  Grid grid_;
  KernelPolicy policy_;
  // Per regime, interior-node stencil weights of the spatial operator.
  std::vector<std::vector<double>> down_;
  std::vector<std::vector<double>> up_;
};

/// Upper or lower good-deal function for bound B.
SolveReport solve_good_deal(const MarketModel& model, const Claim& claim, const Grid& grid,
                            double bound, Direction direction, const SolverOptions& options = {});

/// Linear PIDE with constant eta (row-major D x D, diagonal ignored).
/// eta = 0 gives the minimal-martingale-measure price.
SolveReport solve_fixed_kernel(const MarketModel& model, const Claim& claim, const Grid& grid,
                               const std::vector<double>& eta, const SolverOptions& options = {});

/// solve_fixed_kernel with eta = 0.
SolveReport solve_minimal_martingale(const MarketModel& model, const Claim& claim,
                                     const Grid& grid, const SolverOptions& options = {});

/// One policy iteration of the good-deal step at time index k (V(t_{k+1}) given).
StepResult policy_iteration_step(const MarketModel& model, const Claim& claim, const Grid& grid,
                                 double bound, Direction direction, int k,
                                 std::span<const double> next, std::span<const double> guess);

/// (lower, mmm, upper) at one initial state. The good-deal interval
/// (lower, upper) is open.
struct PriceBounds {
  double lower = 0.0;
  double mmm = 0.0;
  double upper = 0.0;
  bool open_interval = true;
};

/// The three surfaces behind a PriceBounds, reusable across initial states.
struct BoundSurfaces {
  SolveReport lower;
  SolveReport mmm;
  SolveReport upper;

  PriceBounds at(double initial_price, Regime regime) const;
};

BoundSurfaces solve_bounds(const MarketModel& model, const Claim& claim, const Grid& grid,
                           double bound, const SolverOptions& options = {});

/// Runs lower, MMM and upper and reads them at (0, S(0), alpha(0)).
PriceBounds price_bounds(const MarketModel& model, const Claim& claim, const Grid& grid,
                         double bound, const SolverOptions& options = {});

/// Throws InfeasibleBoundError unless bound >= B0 - 1e-12.
void require_feasible_bound(const MarketModel& model, double bound);

}  // namespace gooddeal

#endif  // GOODDEAL_SOLVER_HPP
