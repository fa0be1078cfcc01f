#include "gooddeal/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/erf.hpp>

#include "gooddeal/errors.hpp"

namespace gooddeal {

// ---------------------------------------------------------------- Black-Scholes

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

void check_bs_inputs(double spot, double strike, double volatility, double maturity) {
  if (!(spot > 0.0) || !(strike > 0.0) || !(volatility > 0.0) || !(maturity > 0.0)) {
    throw std::domain_error("black-scholes: spot, strike, volatility and maturity must be positive");
  }
}

}  // namespace

double black_scholes_call(double spot, double strike, double rate, double volatility,
                          double maturity) {
  check_bs_inputs(spot, strike, volatility, maturity);
  const double vol_t = volatility * std::sqrt(maturity);
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * maturity) / vol_t;
  const double d2 = d1 - vol_t;
  return spot * normal_cdf(d1) - strike * std::exp(-rate * maturity) * normal_cdf(d2);
}

double black_scholes_put(double spot, double strike, double rate, double volatility,
                         double maturity) {
  check_bs_inputs(spot, strike, volatility, maturity);
  const double vol_t = volatility * std::sqrt(maturity);
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * maturity) / vol_t;
  const double d2 = d1 - vol_t;
  return strike * std::exp(-rate * maturity) * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

// ---------------------------------------------------------------- Random numbers

double Rng::uniform() {
  // 53 random bits, shifted off zero by half a unit.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t shard) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (shard + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- Chain paths

double ChainPath::occupation_time(Regime regime) const {
  double total = 0.0;
  for (std::size_t n = 0; n < states.size(); ++n) {
    const double end = n + 1 < times.size() ? times[n + 1] : horizon;
    if (states[n] == regime) total += end - times[n];
  }
  return total;
}

std::size_t ChainPath::jump_count(Regime from, Regime to) const {
  std::size_t count = 0;
  for (std::size_t n = 0; n + 1 < states.size(); ++n) {
    if (states[n] == from && states[n + 1] == to) ++count;
  }
  return count;
}

std::vector<double> ChainPath::completed_sojourns(Regime regime) const {
  std::vector<double> out;
  for (std::size_t n = 0; n + 1 < states.size(); ++n) {
    if (states[n] == regime) out.push_back(times[n + 1] - times[n]);
  }
  return out;
}

namespace {

// Row-major D x D intensities; rows may be identically zero (absorbing).
struct RateMatrix {
  std::size_t size = 0;
  std::vector<double> rates;
  std::vector<double> exit;  // total exit intensity per regime

  double rate(std::size_t i, std::size_t j) const { return rates[i * size + j]; }
};

RateMatrix from_generator(const Generator& g) {
  RateMatrix q;
  q.size = g.size();
  q.rates.assign(g.dense().begin(), g.dense().end());
  q.exit.resize(q.size);
  for (std::size_t i = 0; i < q.size; ++i) q.exit[i] = -g.rate(i, i);
  return q;
}

std::size_t draw_target(const RateMatrix& q, std::size_t from, Rng& rng) {
  const double threshold = rng.uniform() * q.exit[from];
  double cumulative = 0.0;
  std::size_t last = from;
  for (std::size_t j = 0; j < q.size; ++j) {
    if (j == from || q.rate(from, j) <= 0.0) continue;
    cumulative += q.rate(from, j);
    last = j;
    if (threshold < cumulative) return j;
  }
  return last;
}

// Time until the next switch, +inf from an absorbing regime.
double holding_time(const RateMatrix& q, std::size_t state, Rng& rng) {
  return q.exit[state] > 0.0 ? rng.exponential(q.exit[state])
                             : std::numeric_limits<double>::infinity();
}

ChainPath simulate(const RateMatrix& q, std::size_t initial, double horizon, Rng& rng) {
  ChainPath path;
  path.horizon = horizon;
  path.times.push_back(0.0);
  path.states.push_back(Regime::from_index(initial));
  double t = 0.0;
  std::size_t state = initial;
  while (true) {
    t += holding_time(q, state, rng);
    if (!(t < horizon)) break;
    state = draw_target(q, state, rng);
    path.times.push_back(t);
    path.states.push_back(Regime::from_index(state));
  }
  return path;
}

struct Segment {
  std::size_t state;
  double length;
};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    const double n1 = static_cast<double>(count), n2 = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    const double n = n1 + n2;
    mean += delta * n2 / n;
    m2 += other.m2 + delta * delta * n1 * n2 / n;
    count += other.count;
  }
};

}  // namespace

ChainPath simulate_chain(const Generator& generator, Regime initial, double horizon, Rng& rng) {
  if (initial.label() < 1 || initial.index() >= generator.size()) {
    throw ModelError("simulate_chain: initial regime out of range");
  }
  if (!(horizon >= 0.0)) throw ModelError("simulate_chain: horizon must be nonnegative");
  return simulate(from_generator(generator), initial.index(), horizon, rng);
}

ChainPath simulate_chain(const Generator& generator, Regime initial, double horizon,
                         std::uint64_t seed) {
  Rng rng(seed);
  return simulate_chain(generator, initial, horizon, rng);
}

// ---------------------------------------------------------------- Monte Carlo

McEstimate mc_price_fixed_kernel(const MarketModel& model, const Claim& claim,
                                 const std::vector<double>& eta, const McConfig& config) {
  const std::size_t d = model.regime_count();
  if (!claim.payoff) throw ModelError("mc: claim has no payoff");
  if (config.paths < 1) throw ModelError("mc: need at least one path");
  if (!(config.time_step > 0.0) || config.time_step > claim.maturity * (1.0 + 1e-12)) {
    throw ModelError("mc: time_step must lie in (0, maturity]");
  }
  if (eta.size() != d * d) throw ModelError("mc: eta must be D x D");

  // Q-intensities g_ij (1 + eta_ij), diagonal rebalanced through `exit`.
  RateMatrix q;
  q.size = d;
  q.rates.assign(d * d, 0.0);
  q.exit.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      if (!(eta[i * d + j] >= -1.0)) {
        std::ostringstream os;
        os << "mc: eta_" << (i + 1) << (j + 1) << " = " << eta[i * d + j] << " is below -1";
        throw ModelError(os.str());
      }
      const double rate = model.generator().rate(i, j) * (1.0 + eta[i * d + j]);
      q.rates[i * d + j] = rate;
      q.exit[i] += rate;
    }
  }

  const auto& regimes = model.regimes();
  const double maturity = claim.maturity;
  const double log_s0 = std::log(model.initial_price());
  const std::size_t start = model.initial_regime().index();

  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(config.shards, config.paths));
  std::vector<Moments> results(shards);

  auto run_shard = [&](std::size_t shard) {
    Rng rng(derive_seed(config.seed, shard));
    const std::size_t count = config.paths / shards + (shard < config.paths % shards ? 1 : 0);
    std::vector<Segment> segments;
    std::vector<double> normals;
    Moments moments;

    for (std::size_t p = 0; p < count; ++p) {
      segments.clear();
      normals.clear();
      double t = 0.0;
      std::size_t state = start;
      double discount_exponent = 0.0;
      while (t < maturity) {
        const double end = std::min(t + holding_time(q, state, rng), maturity);
        // Exact lognormal pieces, none longer than time_step.
        for (double s = t; s < end;) {
          const double len = std::min(config.time_step, end - s);
          segments.push_back({state, len});
          normals.push_back(rng.normal());
          s += len;
        }
        discount_exponent += regimes[state].rate * (end - t);
        t = end;
        if (t < maturity) state = draw_target(q, state, rng);
      }
      const Regime final_regime = Regime::from_index(state);
      const double discount = std::exp(-discount_exponent);

      auto terminal_value = [&](double sign) {
        double log_s = log_s0;
        for (std::size_t n = 0; n < segments.size(); ++n) {
          const auto& prm = regimes[segments[n].state];
          const double len = segments[n].length;
          log_s += (prm.rate - 0.5 * prm.volatility * prm.volatility) * len +
                   prm.volatility * std::sqrt(len) * sign * normals[n];
        }
        return discount * claim.payoff(std::exp(log_s), final_regime);
      };

      moments.add(config.antithetic ? 0.5 * (terminal_value(1.0) + terminal_value(-1.0))
                                    : terminal_value(1.0));
    }
    results[shard] = moments;
  };

  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(shards)));
  std::atomic<std::size_t> next_shard{0};
  std::vector<std::exception_ptr> failures(shards);
  auto worker = [&] {
    for (std::size_t s; (s = next_shard.fetch_add(1)) < shards;) {
      try {
        run_shard(s);
      } catch (...) {
        failures[s] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  Moments total;
  for (const auto& m : results) total.merge(m);

  McEstimate out;
  out.price = total.mean;
  out.paths_used = total.count;
  out.std_error = total.count > 1
                      ? std::sqrt(total.m2 / static_cast<double>(total.count - 1) /
                                  static_cast<double>(total.count))
                      : 0.0;
  return out;
}

}  // namespace gooddeal
