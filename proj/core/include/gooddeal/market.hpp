#ifndef GOODDEAL_MARKET_HPP
#define GOODDEAL_MARKET_HPP

/**
 * @file market.hpp
 * @brief Regime-switching market with one risky asset.
 *
 * Coefficients are constant per regime. The regime process is a
 * continuous-time Markov chain described by its generator G. Regimes are
 * labelled 1..D in every public interface and error message.
 */

#include <cstddef>
#include <span>
#include <vector>

namespace gooddeal {

/// 1-based regime label with a 0-based storage index.
class Regime {
 public:
  constexpr explicit Regime(int label) : label_(label) {}
  static constexpr Regime from_index(std::size_t index) {
    return Regime(static_cast<int>(index) + 1);
  }

  constexpr int label() const noexcept { return label_; }
  constexpr std::size_t index() const noexcept {
    return static_cast<std::size_t>(label_ - 1);
  }

  friend constexpr bool operator==(Regime, Regime) = default;

 private:
  int label_;
};

/// Market coefficients that hold while the chain sits in one regime.
struct RegimeParams {
  double rate = 0.0;         ///< risk-free rate r(i), per year
  double mean_return = 0.0;  ///< mean rate of return b(i), per year
  double volatility = 0.0;   ///< sigma(i) > 0, per sqrt-year
};

/// Validated Markov-chain generator.
///
/// Off-diagonal rates are nonnegative, each row sums to zero within 1e-12
/// and every diagonal entry is strictly negative (no absorbing regimes).
class Generator {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  /// Validates a dense D x D matrix given row by row.
  static Generator validate(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return size_; }
  double rate(std::size_t from, std::size_t to) const { return rates_[from * size_ + to]; }
  std::span<const double> row(std::size_t from) const {
    return {rates_.data() + from * size_, size_};
  }
  /// Row-major D*D storage.
  std::span<const double> dense() const noexcept { return rates_; }

 private:
  Generator(std::size_t size, std::vector<double> rates)
      : size_(size), rates_(std::move(rates)) {}

  std::size_t size_;
  std::vector<double> rates_;
};

/// Full regime-switching market: per-regime coefficients, chain generator,
/// and the initial state (S(0), alpha(0)).
class MarketModel {
 public:
  MarketModel(std::vector<RegimeParams> regimes, Generator generator,
              Regime initial_regime, double initial_price);

  std::size_t regime_count() const noexcept { return regimes_.size(); }
  const std::vector<RegimeParams>& regimes() const noexcept { return regimes_; }
  const RegimeParams& params(Regime i) const { return regimes_[i.index()]; }
  const Generator& generator() const noexcept { return generator_; }
  Regime initial_regime() const noexcept { return initial_regime_; }
  double initial_price() const noexcept { return initial_price_; }

  /// Same market, different starting state.
  MarketModel with_initial_state(Regime regime, double price) const;

 private:
  std::vector<RegimeParams> regimes_;
  Generator generator_;
  Regime initial_regime_;
  double initial_price_;
};

/// Shorthand for Generator::validate.
Generator validate_generator(const std::vector<std::vector<double>>& rows);

/// Expected sojourn time in regime i, 1 / (-g_ii), in years.
double mean_holding_time(const Generator& generator, Regime i);

/// Diffusion kernel h(i) = -(b(i) - r(i)) / sigma(i). The market price of
/// diffusion risk is -h; it is pinned by the traded asset.
double diffusion_kernel(const MarketModel& model, Regime i);

/// Minimal admissible good-deal bound B0 = max_i h(i)^2.
double min_good_deal_bound(const MarketModel& model);

}  // namespace gooddeal

#endif  // GOODDEAL_MARKET_HPP
