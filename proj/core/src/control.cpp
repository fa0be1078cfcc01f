#include "gooddeal/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "gooddeal/errors.hpp"

namespace gooddeal {

namespace {

double sense(Direction direction) { return direction == Direction::Upper ? 1.0 : -1.0; }

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Running best candidate. Ties in the objective go to the candidate that
// spends less budget, then to the one seen first.
class CandidateSelector {
 public:
  explicit CandidateSelector(Direction direction) : direction_(direction) {}

  bool offer(double objective, double spend) {
    if (found_ && !improves(objective, spend)) return false;
    found_ = true;
    objective_ = objective;
    spend_ = spend;
    return true;
  }

  bool found() const { return found_; }
  double objective() const { return objective_; }

 private:
  bool improves(double objective, double spend) const {
    const double tol = 1e-12 * std::max({1.0, std::abs(objective), std::abs(objective_)});
    const double diff = sense(direction_) * (objective - objective_);
    if (diff > tol) return true;
    if (diff < -tol) return false;
    return spend < spend_ - 1e-14 * std::max(1.0, spend_);
  }

  Direction direction_;
  bool found_ = false;
  double objective_ = 0.0;
  double spend_ = 0.0;
};

void check_budget(double budget) {
  if (budget < 0.0 || std::isnan(budget)) {
    std::ostringstream os;
    os << "static problem: remaining budget B - h(i)^2 = " << budget
       << " is negative; the good-deal bound is below B0";
    throw InfeasibleBoundError(os.str(), budget, 0.0);
  }
}

void check_problem(const StaticProblem& p, std::size_t expected_size, const char* who) {
  if (p.rates.size() != p.gaps.size()) {
    throw ModelError(std::string(who) + ": rates and gaps differ in length");
  }
  if (expected_size != 0 && p.rates.size() != expected_size) {
    std::ostringstream os;
    os << who << ": expected " << expected_size << " off-diagonal rates, got " << p.rates.size();
    throw ModelError(os.str());
  }
  if (p.rates.empty()) throw ModelError(std::string(who) + ": no off-diagonal rates");
  for (std::size_t n = 0; n < p.rates.size(); ++n) {
    if (!(p.rates[n] >= 0.0) || !std::isfinite(p.rates[n])) {
      std::ostringstream os;
      os << who << ": rate #" << (n + 1) << " = " << p.rates[n] << " is not a nonnegative number";
      throw ModelError(os.str());
    }
    if (!std::isfinite(p.gaps[n])) {
      throw ModelError(std::string(who) + ": value gaps must be finite");
    }
  }
  check_budget(p.budget);
}

double two_state(Direction direction, double budget, double rate, double gap, double& eta) {
  if (rate == 0.0 || gap == 0.0) {
    eta = 0.0;
  } else {
    const double scaled = std::sqrt(budget / rate);
    const bool raise = (direction == Direction::Upper) == (gap > 0.0);
    eta = raise ? scaled : -std::min(1.0, scaled);
  }
  return rate * (1.0 + eta) * gap;
}

double three_state(Direction direction, double budget, std::span<const double> rates,
                   std::span<const double> gaps, std::span<double> eta) {
  const double gj = rates[0], gk = rates[1];
  const double dj = gaps[0], dk = gaps[1];

  // A zero rate drops that component from both objective and constraint.
  if (gj == 0.0 || gk == 0.0) {
    if (gj == 0.0 && gk == 0.0) {
      eta[0] = eta[1] = 0.0;
      return 0.0;
    }
    const std::size_t live = gj == 0.0 ? 1 : 0;
    eta[1 - live] = 0.0;
    return two_state(direction, budget, rates[live], gaps[live], eta[live]);
  }

  const double s = sense(direction);
  CandidateSelector best(direction);
  std::array<double, 2> chosen{0.0, 0.0};

  auto consider = [&](double ej, double ek) {
    if (ej < -1.0 || ek < -1.0) return;
    const double spend = gj * ej * ej + gk * ek * ek;
    if (spend > budget + kQuadraticSlack) return;
    const double objective = gj * (1.0 + ej) * dj + gk * (1.0 + ek) * dk;
    if (best.offer(objective, spend)) chosen = {ej, ek};
  };

  // Both components pinned.
  consider(-1.0, -1.0);

  // One pinned: the other spends what is left, B~ = sqrt((budget - g_pinned) / g_free).
  if (budget - gk >= -kQuadraticSlack) {
    const double scaled = std::sqrt(std::max(0.0, budget - gk) / gj);
    consider(s * sign_of(dj) * scaled, -1.0);
  }
  if (budget - gj >= -kQuadraticSlack) {
    const double scaled = std::sqrt(std::max(0.0, budget - gj) / gk);
    consider(-1.0, s * sign_of(dk) * scaled);
  }

  // Interior: eta proportional to the gaps, quadratic constraint tight.
  const double weight = gj * dj * dj + gk * dk * dk;
  if (weight > 0.0) {
    const double c = std::sqrt(budget / weight);
    consider(s * c * dj, s * c * dk);
  } else {
    consider(0.0, 0.0);
  }

  if (!best.found()) {
    throw SolverError("static problem: no feasible KKT candidate (3 regimes)");
  }
  eta[0] = chosen[0];
  eta[1] = chosen[1];
  return best.objective();
}

double enumerate(Direction direction, double budget, std::span<const double> rates,
                 std::span<const double> gaps, std::span<double> eta) {
  std::vector<std::size_t> live;
  for (std::size_t n = 0; n < rates.size(); ++n) {
    eta[n] = 0.0;
    if (rates[n] > 0.0) live.push_back(n);
  }
  if (live.empty()) return 0.0;
  if (live.size() > 30) {
    throw ModelError("static problem: too many regimes for candidate enumeration");
  }

  const double s = sense(direction);
  const std::size_t count = live.size();
  CandidateSelector best(direction);
  std::vector<double> trial(count), chosen(count);

  // Patterns run from all-pinned down to all-interior so that ties resolve
  // in the same order as the closed forms.
  for (std::uint64_t mask = (std::uint64_t{1} << count); mask-- > 0;) {
    double pinned_spend = 0.0;
    double weight = 0.0;
    for (std::size_t a = 0; a < count; ++a) {
      const double g = rates[live[a]];
      if (mask & (std::uint64_t{1} << a)) {
        pinned_spend += g;
      } else {
        const double d = gaps[live[a]];
        weight += g * d * d;
      }
    }
    const double residual = budget - pinned_spend;
    if (residual < -kQuadraticSlack) continue;
    const double c = weight > 0.0 ? std::sqrt(std::max(0.0, residual) / weight) : 0.0;

    bool feasible = true;
    double spend = 0.0;
    double objective = 0.0;
    for (std::size_t a = 0; a < count && feasible; ++a) {
      const double g = rates[live[a]];
      const double d = gaps[live[a]];
      const double e = (mask & (std::uint64_t{1} << a)) ? -1.0 : s * c * d;
      if (e < -1.0) feasible = false;
      trial[a] = e;
      spend += g * e * e;
      objective += g * (1.0 + e) * d;
    }
    if (!feasible || spend > budget + kQuadraticSlack) continue;
    if (best.offer(objective, spend)) chosen = trial;
  }

  if (!best.found()) {
    throw SolverError("static problem: no feasible KKT candidate");
  }
  for (std::size_t a = 0; a < count; ++a) eta[live[a]] = chosen[a];
  return best.objective();
}

}  // namespace

const char* to_string(Direction direction) noexcept {
  return direction == Direction::Upper ? "upper" : "lower";
}

KernelSolution solve_two_state(const StaticProblem& p) {
  check_problem(p, 1, "two-state problem");
  if (p.rates[0] == 0.0) throw ModelError("two-state problem: g_ij must be positive");
  std::vector<double> eta(1);
  const double objective = two_state(p.direction, p.budget, p.rates[0], p.gaps[0], eta[0]);
  return {std::move(eta), objective};
}

KernelSolution solve_three_state(const StaticProblem& p) {
  check_problem(p, 2, "three-state problem");
  std::vector<double> eta(2);
  const double objective = three_state(p.direction, p.budget, p.rates, p.gaps, eta);
  return {std::move(eta), objective};
}

KernelSolution solve_general(const StaticProblem& p) {
  check_problem(p, 0, "static problem");
  std::vector<double> eta(p.rates.size());
  const double objective = enumerate(p.direction, p.budget, p.rates, p.gaps, eta);
  return {std::move(eta), objective};
}

KernelSolution solve_static(const StaticProblem& p) {
  switch (p.rates.size()) {
    case 1:
      return solve_two_state(p);
    case 2:
      return solve_three_state(p);
    default:
      return solve_general(p);
  }
}

double optimize_kernel(Direction direction, double budget, std::span<const double> rates,
                       std::span<const double> gaps, std::span<double> eta) {
  check_budget(budget);
  switch (rates.size()) {
    case 0:
      return 0.0;
    case 1:
      return two_state(direction, budget, rates[0], gaps[0], eta[0]);
    case 2:
      return three_state(direction, budget, rates, gaps, eta);
    default:
      return enumerate(direction, budget, rates, gaps, eta);
  }
}

double coupling_objective(std::span<const double> rates, std::span<const double> gaps,
                          std::span<const double> eta) {
  double total = 0.0;
  for (std::size_t n = 0; n < rates.size(); ++n) total += rates[n] * (1.0 + eta[n]) * gaps[n];
  return total;
}

double kernel_spend(std::span<const double> rates, std::span<const double> eta) {
  double total = 0.0;
  for (std::size_t n = 0; n < rates.size(); ++n) total += rates[n] * eta[n] * eta[n];
  return total;
}

}  // namespace gooddeal
