#ifndef GOODDEAL_SCENARIO_HPP
#define GOODDEAL_SCENARIO_HPP

/**
 * @file scenario.hpp
 * @brief Batch price-bound sweeps driven by a JSON scenario file.
 *
 * A scenario fixes the market, a European call, the grid and one sweep
 * axis (initial price, good-deal bound, or a list of generator models),
 * and produces rows (sweep_value, regime, lower, mmm, upper). The schema
 * is documented in scenarios/README.md.
 */

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gooddeal/market.hpp"
#include "gooddeal/solver.hpp"

namespace gooddeal {

enum class SweepAxis { InitialPrice, GoodDealBound, GeneratorModels };

const char* to_string(SweepAxis axis) noexcept;

struct GeneratorModelSpec {
  std::string label;
  std::vector<std::vector<double>> generator;
};

struct ScenarioConfig {
  std::string name;
  std::vector<RegimeParams> regimes;
  double strike = 0.0;
  double maturity = 0.0;
  Grid grid{1.0, 1, 0.0, 1.0, 2};
  std::vector<int> initial_regimes;  ///< 1-based

  SweepAxis axis = SweepAxis::InitialPrice;
  /// Initial prices: the sweep list, or a single fixed value.
  std::vector<double> initial_prices;
  /// Good-deal bounds: the sweep list, a single fixed value, or the list
  /// applied to every generator model.
  std::vector<double> bounds;
  /// Generators: one entry unless the axis is GeneratorModels.
  std::vector<GeneratorModelSpec> models;

  SolverOptions solver;  ///< optional "solver" block
  std::string output;
};

/// Parses scenario JSON. Errors are ConfigError with line:column for
/// syntax problems and a field path (e.g. market.regimes[1].sigma) for
/// schema problems. Generators are validated here.
ScenarioConfig parse_scenario(std::string_view text, std::string_view source = "<config>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Market for model `model_index` (0-based) starting at (regime, price).
MarketModel scenario_market(const ScenarioConfig& config, std::size_t model_index,
                            Regime regime, double initial_price);

Claim scenario_claim(const ScenarioConfig& config);

struct ScenarioRow {
  int model = 0;  ///< 1-based model number on the GeneratorModels axis, else 0
  double sweep_value = 0.0;
  int regime = 1;
  double lower = 0.0;
  double mmm = 0.0;
  double upper = 0.0;
};

struct ModelSummary {
  std::string label;
  double min_bound = 0.0;             ///< B0
  std::vector<double> kernels;        ///< h(i)
  std::vector<double> holding_times;  ///< 1 / (-g_ii)
};

struct SolveStats {
  int solves = 0;
  int max_iterations = 0;        ///< worst time step over all solves
  double mean_iterations = 0.0;  ///< per time step, over all solves
  double max_residual = 0.0;
};

struct ScenarioResult {
  std::string name;
  SweepAxis axis = SweepAxis::InitialPrice;
  std::vector<ModelSummary> models;
  std::vector<ScenarioRow> rows;
  SolveStats stats;
};

/// B0, h and holding times for every model; throws InfeasibleBoundError if
/// any configured bound is below the B0 of its model.
ScenarioResult check_scenario(const ScenarioConfig& config);

/// Solves every sweep point. Independent solves run concurrently; rows come
/// back ordered by model, sweep value, then regime.
ScenarioResult run_scenario(const ScenarioConfig& config, unsigned threads = 0);

/// Header plus one line per row, 6 decimals, LF endings.
void write_csv(const ScenarioResult& result, std::ostream& out);

std::string format_summary(const ScenarioResult& result);

/// One "x y" file per (model, regime, curve). Returns the files written;
/// with no rows, writes nothing and prints a warning to `warnings`.
std::vector<std::filesystem::path> emit_plot_data(const ScenarioResult& result,
                                                  const std::filesystem::path& directory,
                                                  const std::string& stem,
                                                  std::ostream& warnings);

}  // namespace gooddeal

#endif  // GOODDEAL_SCENARIO_HPP
