#include "gooddeal/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gooddeal/errors.hpp"

namespace gooddeal {

namespace {

std::string entry_label(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "g_" << (i + 1) << (j + 1);
  return os.str();
}

}  // namespace

Generator Generator::validate(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.size();
  if (d < 2) {
    throw ModelError("generator: need at least 2 regimes, got " + std::to_string(d));
  }
  std::vector<double> dense;
  dense.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) {
      throw ModelError("generator: row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " +
                       std::to_string(d));
    }
    dense.insert(dense.end(), rows[i].begin(), rows[i].end());
  }

  for (std::size_t i = 0; i < d; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dense[i * d + j];
      if (!std::isfinite(g)) {
        throw ModelError("generator: " + entry_label(i, j) + " is not finite");
      }
      if (i != j && g < 0.0) {
        std::ostringstream os;
        os << "generator: off-diagonal " << entry_label(i, j) << " = " << g << " is negative";
        throw ModelError(os.str());
      }
      sum += g;
    }
    if (std::abs(sum) > kRowSumTolerance) {
      std::ostringstream os;
      os << "generator: row " << (i + 1) << " sums to " << sum << ", expected 0";
      throw ModelError(os.str());
    }
    if (!(dense[i * d + i] < 0.0)) {
      std::ostringstream os;
      os << "generator: " << entry_label(i, i) << " = " << dense[i * d + i]
         << " violates g_ii < 0 (regime " << (i + 1) << " is absorbing)";
      throw ModelError(os.str());
    }
  }
  return Generator(d, std::move(dense));
}

MarketModel::MarketModel(std::vector<RegimeParams> regimes, Generator generator,
                         Regime initial_regime, double initial_price)
    : regimes_(std::move(regimes)),
      generator_(std::move(generator)),
      initial_regime_(initial_regime),
      initial_price_(initial_price) {
  if (regimes_.size() != generator_.size()) {
    throw ModelError("market: " + std::to_string(regimes_.size()) +
                     " regime parameter sets for a " + std::to_string(generator_.size()) +
                     "-state generator");
  }
  for (std::size_t i = 0; i < regimes_.size(); ++i) {
    const auto& p = regimes_[i];
    if (!std::isfinite(p.rate) || !std::isfinite(p.mean_return) ||
        !std::isfinite(p.volatility)) {
      throw ModelError("market: regime " + std::to_string(i + 1) + " has non-finite parameters");
    }
    if (!(p.volatility > 0.0)) {
      throw ModelError("market: regime " + std::to_string(i + 1) + " needs sigma > 0");
    }
  }
  if (initial_regime_.label() < 1 ||
      static_cast<std::size_t>(initial_regime_.label()) > regimes_.size()) {
    throw ModelError("market: initial regime " + std::to_string(initial_regime_.label()) +
                     " outside 1.." + std::to_string(regimes_.size()));
  }
  if (!(initial_price_ > 0.0) || !std::isfinite(initial_price_)) {
    throw ModelError("market: initial price must be positive");
  }
}

MarketModel MarketModel::with_initial_state(Regime regime, double price) const {
  return MarketModel(regimes_, generator_, regime, price);
}

Generator validate_generator(const std::vector<std::vector<double>>& rows) {
  return Generator::validate(rows);
}

double mean_holding_time(const Generator& generator, Regime i) {
  return 1.0 / (-generator.rate(i.index(), i.index()));
}

double diffusion_kernel(const MarketModel& model, Regime i) {
  const auto& p = model.params(i);
  return -(p.mean_return - p.rate) / p.volatility;
}

double min_good_deal_bound(const MarketModel& model) {
  double b0 = 0.0;
  for (std::size_t i = 0; i < model.regime_count(); ++i) {
    const double h = diffusion_kernel(model, Regime::from_index(i));
    b0 = std::max(b0, h * h);
  }
  return b0;
}

}  // namespace gooddeal
