#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "gooddeal/errors.hpp"
#include "gooddeal/oracle.hpp"
#include "support/oracles.hpp"

using namespace gooddeal;

namespace {

const Generator kModelOne = validate_generator({{-0.5, 0.5}, {5.0, -5.0}});

MarketModel model_one(Regime start = Regime(1)) {
  return MarketModel({{0.06, 0.15, 0.12}, {0.06, -0.22, 0.26}}, kModelOne, start, 100.0);
}

}  // namespace

TEST(BlackScholes, FrozenReferenceValues) {
  EXPECT_NEAR(black_scholes_call(100, 100, 0.06, 0.12, 1.0), 8.124842860236240, 1e-10);
  EXPECT_NEAR(black_scholes_call(100, 100, 0.06, 0.26, 1.0), 13.21857505867771, 1e-10);
}

TEST(BlackScholes, AgreesWithQuadrature) {
  for (double x : {-6.0, -2.5, -0.3, 0.0, 0.7, 1.9, 4.0}) {
    EXPECT_NEAR(normal_cdf(x), reference::normal_cdf_quadrature(x), 1e-12) << x;
  }
  for (double s : {60.0, 100.0, 140.0}) {
    EXPECT_NEAR(black_scholes_call(s, 100, 0.06, 0.12, 1.0),
                reference::bs_call_quadrature(s, 100, 0.06, 0.12, 1.0), 1e-9);
  }
}

TEST(BlackScholes, PutCallParity) {
  for (double s : {50.0, 90.0, 100.0, 130.0}) {
    for (double sigma : {0.05, 0.12, 0.26, 0.8}) {
      const double c = black_scholes_call(s, 100, 0.06, sigma, 1.0);
      const double p = black_scholes_put(s, 100, 0.06, sigma, 1.0);
      EXPECT_NEAR(c - p, s - 100.0 * std::exp(-0.06), 1e-9);
    }
  }
}

TEST(BlackScholes, Limits) {
  EXPECT_NEAR(black_scholes_call(100, 90, 0.06, 1e-8, 1.0), 100.0 - 90.0 * std::exp(-0.06), 1e-9);
  EXPECT_NEAR(black_scholes_call(100, 1e-12, 0.06, 0.2, 1.0), 100.0, 1e-9);
  EXPECT_THROW(black_scholes_call(0.0, 100, 0.06, 0.2, 1.0), std::domain_error);
  EXPECT_THROW(black_scholes_call(100, 100, 0.06, 0.0, 1.0), std::domain_error);
  EXPECT_THROW(black_scholes_put(100, 100, 0.06, 0.2, 0.0), std::domain_error);
}

TEST(Rng, UniformStaysInsideOpenInterval) {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int n = 0; n < 200000; ++n) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 200000, 0.5, 3e-3);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double s1 = 0.0, s2 = 0.0;
  const int n = 400000;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Chain, MeanHoldingTime) {
  const auto path = simulate_chain(kModelOne, Regime(1), 2.5e5, 101);
  const auto sojourns = path.completed_sojourns(Regime(1));
  ASSERT_GE(sojourns.size(), 100000u);
  double sum = 0.0;
  for (std::size_t n = 0; n < 100000; ++n) sum += sojourns[n];
  EXPECT_NEAR(sum / 100000, 2.00, 0.02);
}

TEST(Chain, PathsVisitBothRegimes) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto path = simulate_chain(kModelOne, Regime(1), 50.0, seed);
    EXPECT_GT(path.occupation_time(Regime(1)), 0.0);
    EXPECT_GT(path.occupation_time(Regime(2)), 0.0);
  }
}

TEST(Chain, CompensatedJumpCountHasZeroMean) {
  Rng rng(5);
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int p = 0; p < n; ++p) {
    const auto path = simulate_chain(kModelOne, Regime(1), 1.0, rng);
    const double m = static_cast<double>(path.jump_count(Regime(1), Regime(2))) -
                     0.5 * path.occupation_time(Regime(1));
    s1 += m;
    s2 += m * m;
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
  EXPECT_LE(std::abs(mean), 3.0 * se) << "mean " << mean << " se " << se;
}

TEST(Chain, LongRunOccupation) {
  const auto path = simulate_chain(kModelOne, Regime(2), 1e4, 77);
  EXPECT_NEAR(path.occupation_time(Regime(1)) / 1e4, 5.0 / 5.5, 0.01);
}

TEST(Chain, PiecesTileTheHorizon) {
  const auto path = simulate_chain(kModelOne, Regime(1), 10.0, 3);
  ASSERT_EQ(path.times.size(), path.states.size());
  EXPECT_EQ(path.times.front(), 0.0);
  for (std::size_t n = 1; n < path.times.size(); ++n) {
    EXPECT_GT(path.times[n], path.times[n - 1]);
    EXPECT_NE(path.states[n], path.states[n - 1]);
  }
  EXPECT_NEAR(path.occupation_time(Regime(1)) + path.occupation_time(Regime(2)), 10.0, 1e-12);
}

TEST(MonteCarlo, DeterministicStockGivesForwardValue) {
  const MarketModel m({{0.06, 0.1, 1e-8}, {0.06, 0.1, 1e-8}}, kModelOne, Regime(1), 100.0);
  McConfig cfg;
  cfg.paths = 20000;
  const auto est = mc_price_fixed_kernel(m, european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  EXPECT_NEAR(est.price, 100.0 - 100.0 * std::exp(-0.06), 1e-4);
}

TEST(MonteCarlo, StockIsAMartingale) {
  McConfig cfg;
  cfg.paths = 200000;
  cfg.time_step = 0.25;
  for (const auto start : {Regime(1), Regime(2)}) {
    const auto est = mc_price_fixed_kernel(model_one(start), stock_claim(1.0), {0, 0.7, -0.4, 0}, cfg);
    EXPECT_LE(std::abs(est.price - 100.0), 3.0 * est.std_error) << est.price << " +- " << est.std_error;
  }
}

TEST(MonteCarlo, SwitchedOffChainGivesBlackScholes) {
  McConfig cfg;
  cfg.paths = 200000;
  cfg.seed = 99;
  const auto est =
      mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, -1.0 + 1e-9, 0, 0}, cfg);
  const double bs = black_scholes_call(100, 100, 0.06, 0.12, 1.0);
  EXPECT_LE(std::abs(est.price - bs), 3.0 * est.std_error) << est.price << " +- " << est.std_error;
}

TEST(MonteCarlo, ReproducibleAcrossThreadCounts) {
  McConfig cfg;
  cfg.paths = 20000;
  cfg.seed = 4242;
  cfg.threads = 1;
  const auto one = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  cfg.threads = 4;
  const auto four = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  const auto again = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  EXPECT_EQ(one.price, four.price);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_EQ(four.price, again.price);
  cfg.seed = 4243;
  const auto other = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  EXPECT_NE(other.price, one.price);
}

TEST(MonteCarlo, StandardErrorHalvesWithFourTimesThePaths) {
  McConfig cfg;
  cfg.paths = 25000;
  const auto small = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  cfg.paths = 100000;
  const auto large = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  const double ratio = small.std_error / large.std_error;
  EXPECT_GE(ratio, 1.8);
  EXPECT_LE(ratio, 2.2);
  EXPECT_EQ(large.paths_used, 100000u);
}

TEST(MonteCarlo, AntitheticReducesError) {
  McConfig cfg;
  cfg.paths = 50000;
  const auto plain = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  cfg.antithetic = true;
  const auto anti = mc_price_fixed_kernel(model_one(), european_call(100.0, 1.0), {0, 0, 0, 0}, cfg);
  EXPECT_LT(anti.std_error, plain.std_error);
  EXPECT_LE(std::abs(anti.price - plain.price), 3.0 * std::hypot(anti.std_error, plain.std_error));
}

TEST(MonteCarlo, RejectsBadInputs) {
  McConfig cfg;
  const auto claim = european_call(100.0, 1.0);
  EXPECT_THROW(mc_price_fixed_kernel(model_one(), claim, {0, -1.5, 0, 0}, cfg), ModelError);
  EXPECT_THROW(mc_price_fixed_kernel(model_one(), claim, {0, 0, 0}, cfg), ModelError);
  cfg.time_step = 2.0;
  EXPECT_THROW(mc_price_fixed_kernel(model_one(), claim, {0, 0, 0, 0}, cfg), ModelError);
}
