#include "gooddeal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gooddeal/errors.hpp"
#include "gooddeal/tridiagonal.hpp"

namespace gooddeal {

// ---------------------------------------------------------------- Grid

Grid::Grid(double maturity, int time_steps, double s_min, double s_max, int s_steps)
    : maturity_(maturity),
      time_steps_(time_steps),
      s_min_(s_min),
      s_max_(s_max),
      s_steps_(s_steps) {
  if (!(maturity > 0.0) || !std::isfinite(maturity)) {
    throw ModelError("grid: maturity must be positive");
  }
  if (time_steps < 1) throw ModelError("grid: need at least one time step");
  if (!(s_min >= 0.0)) throw ModelError("grid: s_min must be nonnegative");
  if (!(s_max > s_min) || !std::isfinite(s_max)) {
    throw ModelError("grid: s_max must exceed s_min");
  }
  if (s_steps < 2) throw ModelError("grid: need at least two stock intervals");
}

Grid Grid::from_spacing(double maturity, double dt, double s_min, double s_max, double ds) {
  auto count = [](double span, double step, const char* what) {
    if (!(step > 0.0)) throw ModelError(std::string("grid: ") + what + " must be positive");
    const double n = span / step;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, rounded)) {
      std::ostringstream os;
      os << "grid: " << what << " = " << step << " does not divide the range " << span;
      throw ModelError(os.str());
    }
    return static_cast<int>(rounded);
  };
  return Grid(maturity, count(maturity, dt, "dt"), s_min, s_max,
              count(s_max - s_min, ds, "ds"));
}

Grid Grid::refined() const {
  return Grid(maturity_, 2 * time_steps_, s_min_, s_max_, 2 * s_steps_);
}

// ---------------------------------------------------------------- Claims

Claim european_call(double strike, double maturity) {
  if (!(strike >= 0.0)) throw ModelError("call: strike must be nonnegative");
  std::ostringstream label;
  label << "european_call(K=" << strike << ", T=" << maturity << ")";
  Claim claim;
  claim.label = label.str();
  claim.maturity = maturity;
  claim.payoff = [strike](double x, Regime) { return std::max(x - strike, 0.0); };
  claim.boundary = [strike](double tau, double x, const RegimeParams& p) {
    return std::max(x - strike * std::exp(-p.rate * tau), 0.0);
  };
  return claim;
}

Claim zero_claim(double maturity) {
  Claim claim;
  claim.label = "zero";
  claim.maturity = maturity;
  claim.payoff = [](double, Regime) { return 0.0; };
  claim.boundary = [](double, double, const RegimeParams&) { return 0.0; };
  return claim;
}

Claim stock_claim(double maturity) {
  Claim claim;
  claim.label = "stock";
  claim.maturity = maturity;
  claim.payoff = [](double x, Regime) { return x; };
  claim.boundary = [](double, double x, const RegimeParams&) { return x; };
  return claim;
}

// ---------------------------------------------------------------- Surfaces

ValueSurface::ValueSurface(Grid grid, std::size_t regimes)
    : grid_(grid),
      regimes_(regimes),
      values_(static_cast<std::size_t>(grid.time_steps() + 1) * regimes * grid.node_count(), 0.0) {}

double ValueSurface::interpolate(double x, Regime regime, int k) const {
  const double lo = grid_.s_min(), hi = grid_.s_max();
  const double slack = 1e-12 * std::max(1.0, hi);
  if (!(x >= lo - slack && x <= hi + slack)) {
    std::ostringstream os;
    os << "interpolate: S = " << x << " outside the grid range [" << lo << ", " << hi << "]";
    throw ModelError(os.str());
  }
  if (regime.label() < 1 || regime.index() >= regimes_) {
    throw ModelError("interpolate: regime " + std::to_string(regime.label()) + " out of range");
  }
  const double pos = std::clamp((x - lo) / grid_.ds(), 0.0, static_cast<double>(grid_.s_steps()));
  const auto m = std::min(static_cast<std::size_t>(pos), grid_.node_count() - 2);
  const double w = pos - static_cast<double>(m);
  const std::size_t i = regime.index();
  return (1.0 - w) * (*this)(k, m, i) + w * (*this)(k, m + 1, i);
}

KernelField::KernelField(const Grid& grid, std::size_t regimes)
    : time_steps_(grid.time_steps()),
      nodes_(grid.node_count()),
      regimes_(regimes),
      eta_(static_cast<std::size_t>(grid.time_steps() + 1) * regimes * grid.node_count() * regimes,
           0.0) {}

// ---------------------------------------------------------------- Stepper

ImplicitStepper::ImplicitStepper(std::vector<RegimeParams> regimes, std::vector<double> rates,
                                 Grid grid, KernelPolicy policy)
    : regimes_(std::move(regimes)),
      rates_(std::move(rates)),
      grid_(grid),
      policy_(std::move(policy)) {
  const std::size_t d = regimes_.size();
  if (d == 0) throw ModelError("stepper: no regimes");
  if (rates_.size() != d * d) throw ModelError("stepper: rate matrix must be D x D");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j && !(rates_[i * d + j] >= 0.0)) {
        throw ModelError("stepper: negative transition rate");
      }
    }
  }
  if (const auto* fixed = std::get_if<FixedKernel>(&policy_)) {
    if (fixed->eta.size() != d * d) throw ModelError("fixed kernel: eta must be D x D");
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (i != j && !(fixed->eta[i * d + j] >= -1.0)) {
          std::ostringstream os;
          os << "fixed kernel: eta_" << (i + 1) << (j + 1) << " = " << fixed->eta[i * d + j]
             << " is below -1";
          throw ModelError(os.str());
        }
      }
    }
  } else {
    const auto& opt = std::get<OptimizedKernel>(policy_);
    if (opt.budgets.size() != d) throw ModelError("optimized kernel: need one budget per regime");
    for (std::size_t i = 0; i < d; ++i) {
      if (!(opt.budgets[i] >= 0.0)) {
        throw InfeasibleBoundError("optimized kernel: negative budget in regime " +
                                       std::to_string(i + 1),
                                   opt.budgets[i], 0.0);
      }
    }
  }

  const std::size_t n = grid_.node_count();
  const double ds = grid_.ds();
  down_.assign(d, std::vector<double>(n, 0.0));
  up_.assign(d, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    const double r = regimes_[i].rate;
    const double sigma = regimes_[i].volatility;
    for (std::size_t m = 1; m + 1 < n; ++m) {
      const double x = grid_.node(m);
      const double diffusion = 0.5 * sigma * sigma * x * x / (ds * ds);
      const double drift = r * x;
      double down = diffusion - drift / (2.0 * ds);
      double up = diffusion + drift / (2.0 * ds);
      // Keep the M-matrix property: upwind the first derivative wherever the
      // central stencil would carry a negative weight.
      if (down < 0.0 || up < 0.0) {
        down = diffusion + std::max(-drift, 0.0) / ds;
        up = diffusion + std::max(drift, 0.0) / ds;
      }
      down_[i][m] = down;
      up_[i][m] = up;
    }
  }
}

void ImplicitStepper::compute_kernel(std::span<const double> guess, std::span<double> eta) const {
  const std::size_t d = regimes_.size();
  const std::size_t n = grid_.node_count();
  std::fill(eta.begin(), eta.end(), 0.0);

  if (const auto* fixed = std::get_if<FixedKernel>(&policy_)) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t j = 0; j < d; ++j) {
          if (j != i) eta[(i * n + m) * d + j] = fixed->eta[i * d + j];
        }
      }
    }
    return;
  }

  const auto& opt = std::get<OptimizedKernel>(policy_);
  if (d < 2) return;
  std::vector<double> rates(d - 1), gaps(d - 1), local(d - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0, c = 0; j < d; ++j) {
      if (j != i) rates[c++] = rates_[i * d + j];
    }
    for (std::size_t m = 0; m < n; ++m) {
      const double vi = guess[i * n + m];
      for (std::size_t j = 0, c = 0; j < d; ++j) {
        if (j != i) gaps[c++] = guess[j * n + m] - vi;
      }
      optimize_kernel(opt.direction, opt.budgets[i], rates, gaps, local);
      for (std::size_t j = 0, c = 0; j < d; ++j) {
        if (j != i) eta[(i * n + m) * d + j] = local[c++];
      }
    }
  }
}

StepResult ImplicitStepper::iterate(std::span<const double> next, std::span<const double> guess,
                                    std::span<const double> lower,
                                    std::span<const double> upper) const {
  const std::size_t d = regimes_.size();
  const std::size_t n = grid_.node_count();
  const std::size_t interior = n - 2;
  const double dt = grid_.dt();
  if (next.size() != d * n || guess.size() != d * n || lower.size() != d || upper.size() != d) {
    throw SolverError("implicit step: slice sizes do not match the grid");
  }

  StepResult out;
  out.values.assign(guess.begin(), guess.end());
  out.eta.assign(d * n * d, 0.0);
  compute_kernel(guess, out.eta);

  std::vector<double> sub(interior), diag(interior), super(interior), rhs(interior),
      scratch(interior);
  for (std::size_t i = 0; i < d; ++i) {
    const double r = regimes_[i].rate;
    for (std::size_t m = 1; m + 1 < n; ++m) {
      double intensity = 0.0;
      double inflow = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        const double q = rates_[i * d + j] * (1.0 + out.eta[(i * n + m) * d + j]);
        intensity += q;
        inflow += q * out.values[j * n + m];
      }
      const std::size_t row = m - 1;
      sub[row] = -dt * down_[i][m];
      super[row] = -dt * up_[i][m];
      diag[row] = 1.0 + dt * (down_[i][m] + up_[i][m] + r + intensity);
      rhs[row] = next[i * n + m] + dt * inflow;
    }
    rhs.front() += dt * down_[i][1] * lower[i];
    rhs.back() += dt * up_[i][n - 2] * upper[i];

    solve_tridiagonal(sub, diag, super, rhs, scratch);

    out.values[i * n] = lower[i];
    out.values[i * n + n - 1] = upper[i];
    std::copy(rhs.begin(), rhs.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * n + 1));
  }

  double residual = 0.0;
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    residual = std::max(residual, std::abs(out.values[p] - guess[p]));
  }
  out.residual = residual;
  return out;
}

// ---------------------------------------------------------------- Drivers

namespace {

void check_claim(const Claim& claim, const Grid& grid) {
  if (!claim.payoff || !claim.boundary) throw ModelError("claim: payoff and boundary required");
  if (std::abs(claim.maturity - grid.maturity()) > 1e-12 * std::max(1.0, grid.maturity())) {
    std::ostringstream os;
    os << "claim maturity " << claim.maturity << " differs from grid maturity "
       << grid.maturity();
    throw ModelError(os.str());
  }
}

void boundary_values(const std::vector<RegimeParams>& regimes, const Claim& claim,
                     const Grid& grid, int k, std::vector<double>& lower,
                     std::vector<double>& upper) {
  const double tau = static_cast<double>(grid.time_steps() - k) * grid.dt();
  lower.resize(regimes.size());
  upper.resize(regimes.size());
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    lower[i] = claim.boundary(tau, grid.s_min(), regimes[i]);
    upper[i] = claim.boundary(tau, grid.s_max(), regimes[i]);
  }
}

SolveReport run(const std::vector<RegimeParams>& regimes, std::vector<double> rates,
                const Claim& claim, const Grid& grid, KernelPolicy policy,
                const SolverOptions& options) {
  check_claim(claim, grid);
  const std::size_t d = regimes.size();
  const std::size_t n = grid.node_count();
  const int steps = grid.time_steps();
  const ImplicitStepper stepper(regimes, std::move(rates), grid, std::move(policy));

  SolveReport report{ValueSurface(grid, d), KernelField(grid, d), {}, 0.0, {}};
  report.policy_iterations.assign(static_cast<std::size_t>(steps), 0);
  if (options.trace_residuals) report.residual_trace.resize(static_cast<std::size_t>(steps));

  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t m = 0; m < n; ++m) {
      const double value = claim.payoff(grid.node(m), Regime::from_index(i));
      if (!std::isfinite(value)) {
        throw ModelError("claim: payoff is not finite at S = " + std::to_string(grid.node(m)));
      }
      report.surface(steps, m, i) = value;
    }
  }

  std::vector<double> lower, upper, guess;
  for (int k = steps - 1; k >= 0; --k) {
    boundary_values(regimes, claim, grid, k, lower, upper);
    const auto next = report.surface.slice(k + 1);
    guess.assign(next.begin(), next.end());

    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
      StepResult step = stepper.iterate(next, guess, lower, upper);
      if (options.trace_residuals) {
        report.residual_trace[static_cast<std::size_t>(k)].push_back(step.residual);
      }
      if (step.residual <= options.tolerance) {
        std::copy(step.values.begin(), step.values.end(), report.surface.slice(k).begin());
        std::copy(step.eta.begin(), step.eta.end(), report.kernels.slice(k).begin());
        report.policy_iterations[static_cast<std::size_t>(k)] = it;
        report.max_policy_residual = std::max(report.max_policy_residual, step.residual);
        converged = true;
        break;
      }
      guess = std::move(step.values);
    }
    if (!converged) {
      std::ostringstream os;
      os << "policy iteration did not reach tolerance " << options.tolerance << " within "
         << options.max_iterations << " iterations at t = " << grid.time(k);
      throw SolverError(os.str());
    }
  }
  return report;
}

std::vector<double> generator_rates(const MarketModel& model) {
  const auto dense = model.generator().dense();
  return {dense.begin(), dense.end()};
}

OptimizedKernel optimized_policy(const MarketModel& model, double bound, Direction direction) {
  require_feasible_bound(model, bound);
  OptimizedKernel policy{direction, {}};
  for (std::size_t i = 0; i < model.regime_count(); ++i) {
    const double h = diffusion_kernel(model, Regime::from_index(i));
    policy.budgets.push_back(std::max(0.0, bound - h * h));
  }
  return policy;
}

}  // namespace

void require_feasible_bound(const MarketModel& model, double bound) {
  const double b0 = min_good_deal_bound(model);
  if (!(bound >= b0 - 1e-12)) throw InfeasibleBoundError::below_minimum("", bound, b0);
}

SolveReport solve_good_deal(const MarketModel& model, const Claim& claim, const Grid& grid,
                            double bound, Direction direction, const SolverOptions& options) {
  return run(model.regimes(), generator_rates(model), claim, grid,
             optimized_policy(model, bound, direction), options);
}

SolveReport solve_fixed_kernel(const MarketModel& model, const Claim& claim, const Grid& grid,
                               const std::vector<double>& eta, const SolverOptions& options) {
  return run(model.regimes(), generator_rates(model), claim, grid, FixedKernel{eta}, options);
}

SolveReport solve_minimal_martingale(const MarketModel& model, const Claim& claim,
                                     const Grid& grid, const SolverOptions& options) {
  const std::size_t d = model.regime_count();
  return solve_fixed_kernel(model, claim, grid, std::vector<double>(d * d, 0.0), options);
}

StepResult policy_iteration_step(const MarketModel& model, const Claim& claim, const Grid& grid,
                                 double bound, Direction direction, int k,
                                 std::span<const double> next, std::span<const double> guess) {
  check_claim(claim, grid);
  if (k < 0 || k >= grid.time_steps()) throw ModelError("policy step: time index out of range");
  const ImplicitStepper stepper(model.regimes(), generator_rates(model), grid,
                                optimized_policy(model, bound, direction));
  std::vector<double> lower, upper;
  boundary_values(model.regimes(), claim, grid, k, lower, upper);
  return stepper.iterate(next, guess, lower, upper);
}

PriceBounds BoundSurfaces::at(double initial_price, Regime regime) const {
  PriceBounds out;
  out.lower = lower.surface.interpolate(initial_price, regime);
  out.mmm = mmm.surface.interpolate(initial_price, regime);
  out.upper = upper.surface.interpolate(initial_price, regime);
  return out;
}

BoundSurfaces solve_bounds(const MarketModel& model, const Claim& claim, const Grid& grid,
                           double bound, const SolverOptions& options) {
  require_feasible_bound(model, bound);
  return BoundSurfaces{solve_good_deal(model, claim, grid, bound, Direction::Lower, options),
                       solve_minimal_martingale(model, claim, grid, options),
                       solve_good_deal(model, claim, grid, bound, Direction::Upper, options)};
}

PriceBounds price_bounds(const MarketModel& model, const Claim& claim, const Grid& grid,
                         double bound, const SolverOptions& options) {
  return solve_bounds(model, claim, grid, bound, options)
      .at(model.initial_price(), model.initial_regime());
}

}  // namespace gooddeal
