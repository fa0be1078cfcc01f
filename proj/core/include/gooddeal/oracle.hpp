#ifndef GOODDEAL_ORACLE_HPP
#define GOODDEAL_ORACLE_HPP

/**
 * @file oracle.hpp
 * @brief Reference prices that do not go through the PIDE engine.
 *
 * Closed-form Black-Scholes, exact simulation of the regime chain, and a
 * Monte-Carlo pricer under a constant jump kernel eta. Between switches the
 * stock moves as geometric Brownian motion with drift r(i), sampled exactly.
 */

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gooddeal/market.hpp"
#include "gooddeal/solver.hpp"

namespace gooddeal {

/// Standard normal distribution function.
double normal_cdf(double x);

double black_scholes_call(double spot, double strike, double rate, double volatility,
                          double maturity);
double black_scholes_put(double spot, double strike, double rate, double volatility,
                         double maturity);

/// Seedable 64-bit Mersenne Twister with inverse-CDF variates.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via the inverse distribution function.
  double normal();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

/// Deterministic per-shard seed derived from a root seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t shard);

/// Piecewise-constant regime path on [0, horizon]. The chain is in
/// `states[n]` on [times[n], times[n+1]), with times[0] = 0 and the last
/// piece ending at `horizon`.
struct ChainPath {
  std::vector<double> times;
  std::vector<Regime> states;
  double horizon = 0.0;

  Regime state_at_end() const { return states.back(); }
  double occupation_time(Regime regime) const;
  std::size_t jump_count(Regime from, Regime to) const;
  /// Lengths of the sojourns in `regime` that ended with a jump before the horizon.
  std::vector<double> completed_sojourns(Regime regime) const;
};

/// Exact simulation: exponential holding times with rate -g_ii, next state
/// j with probability g_ij / (-g_ii), truncated at the horizon.
ChainPath simulate_chain(const Generator& generator, Regime initial, double horizon,
                         std::uint64_t seed);
ChainPath simulate_chain(const Generator& generator, Regime initial, double horizon, Rng& rng);

struct McConfig {
  std::size_t paths = 100000;
  double time_step = 1.0;  ///< caps the length of one exact GBM segment (years)
  std::uint64_t seed = 20090101;
  bool antithetic = false;  ///< pair each Brownian draw with its negation
  unsigned shards = 64;     ///< fixed shard count keeps results thread-count independent
  unsigned threads = 0;     ///< 0: hardware concurrency
};

struct McEstimate {
  double price = 0.0;
  double std_error = 0.0;
  std::size_t paths_used = 0;
};

/// Price of `claim` at (0, S(0), alpha(0)) under the measure with kernel
/// (h, eta): Q-intensities g_ij (1 + eta_ij), stock drift r(i), payoff
/// discounted by exp(-int r(alpha(s)) ds). `eta` is row-major D x D with the
/// diagonal ignored; every off-diagonal entry must be >= -1.
McEstimate mc_price_fixed_kernel(const MarketModel& model, const Claim& claim,
                                 const std::vector<double>& eta, const McConfig& config);

}  // namespace gooddeal

#endif  // GOODDEAL_ORACLE_HPP
