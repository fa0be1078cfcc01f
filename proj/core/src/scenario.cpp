#include "gooddeal/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "gooddeal/errors.hpp"

namespace gooddeal {

using nlohmann::json;

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::InitialPrice:
      return "initial_price";
    case SweepAxis::GoodDealBound:
      return "good_deal_bound";
    case SweepAxis::GeneratorModels:
      return "generator_models";
  }
  return "?";
}

// ---------------------------------------------------------------- Parsing

namespace {

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t n) {
  return path + "[" + std::to_string(n) + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(child(path, key), "missing required field");
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number, got " + std::string(value.type_name()));
  const double x = value.get<double>();
  if (!std::isfinite(x)) fail(path, "number is not finite");
  return x;
}

std::vector<double> number_list(const json& value, const std::string& path) {
  if (!value.is_array()) fail(path, "expected an array of numbers");
  if (value.empty()) fail(path, "list is empty");
  std::vector<double> out;
  for (std::size_t n = 0; n < value.size(); ++n) out.push_back(number(value[n], element(path, n)));
  return out;
}

std::vector<double> number_or_list(const json& value, const std::string& path) {
  if (value.is_array()) return number_list(value, path);
  return {number(value, path)};
}

std::vector<std::vector<double>> matrix(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) fail(path, "expected a square array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < value.size(); ++n) {
    const auto row_path = element(path, n);
    if (!value[n].is_array()) fail(row_path, "expected an array of numbers");
    std::vector<double> row;
    for (std::size_t m = 0; m < value[n].size(); ++m) {
      row.push_back(number(value[n][m], element(row_path, m)));
    }
    rows.push_back(std::move(row));
  }
  try {
    validate_generator(rows);
  } catch (const ModelError& e) {
    fail(path, e.what());
  }
  return rows;
}

std::string text(const json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string");
  return value.get<std::string>();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t n = 0; n < std::min(byte, text.size()); ++n) {
    if (text[n] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text_in, std::string_view source) {
  json root;
  try {
    root = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const auto [line, column] = line_column(text_in, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << source << ":" << line << ":" << column << ": JSON syntax error: " << e.what();
    throw ConfigError(os.str());
  }

  try {
    ScenarioConfig cfg;
    if (!root.is_object()) fail("<root>", "expected an object");
    cfg.name = root.contains("name") ? text(root["name"], "name") : std::string(source);

    const auto& market = field(root, "market", "");
    const auto& regimes = field(market, "regimes", "market");
    if (!regimes.is_array() || regimes.empty()) fail("market.regimes", "expected a non-empty array");
    for (std::size_t n = 0; n < regimes.size(); ++n) {
      const auto path = element("market.regimes", n);
      RegimeParams p;
      p.rate = number(field(regimes[n], "r", path), child(path, "r"));
      p.mean_return = number(field(regimes[n], "b", path), child(path, "b"));
      p.volatility = number(field(regimes[n], "sigma", path), child(path, "sigma"));
      if (!(p.volatility > 0.0)) fail(child(path, "sigma"), "volatility must be positive");
      cfg.regimes.push_back(p);
    }

    const auto& claim = field(root, "claim", "");
    const auto kind = text(field(claim, "kind", "claim"), "claim.kind");
    if (kind != "european_call") fail("claim.kind", "unsupported claim kind '" + kind + "'");
    cfg.strike = number(field(claim, "strike", "claim"), "claim.strike");
    cfg.maturity = number(field(claim, "maturity", "claim"), "claim.maturity");
    if (!(cfg.strike > 0.0)) fail("claim.strike", "must be positive");
    if (!(cfg.maturity > 0.0)) fail("claim.maturity", "must be positive");

    const auto& grid = field(root, "grid", "");
    try {
      cfg.grid = Grid::from_spacing(cfg.maturity, number(field(grid, "dt", "grid"), "grid.dt"),
                                    number(field(grid, "s_min", "grid"), "grid.s_min"),
                                    number(field(grid, "s_max", "grid"), "grid.s_max"),
                                    number(field(grid, "ds", "grid"), "grid.ds"));
    } catch (const ModelError& e) {
      fail("grid", e.what());
    }

    const auto& starts = field(root, "initial_regimes", "");
    if (!starts.is_array() || starts.empty()) fail("initial_regimes", "expected a non-empty array");
    for (std::size_t n = 0; n < starts.size(); ++n) {
      const auto path = element("initial_regimes", n);
      if (!starts[n].is_number_integer()) fail(path, "expected an integer regime label");
      const int label = starts[n].get<int>();
      if (label < 1 || static_cast<std::size_t>(label) > cfg.regimes.size()) {
        fail(path, "regime " + std::to_string(label) + " outside 1.." +
                       std::to_string(cfg.regimes.size()));
      }
      cfg.initial_regimes.push_back(label);
    }

    const auto& sweep = field(root, "sweep", "");
    if (!sweep.is_object() || sweep.size() != 1) {
      fail("sweep", "expected exactly one axis: initial_price, good_deal_bound or generator_models");
    }
    const std::string axis = sweep.begin().key();
    const auto& axis_value = sweep.begin().value();
    const std::string axis_path = "sweep." + axis;

    if (axis == "initial_price") {
      cfg.axis = SweepAxis::InitialPrice;
      cfg.initial_prices = number_list(axis_value, axis_path);
      cfg.bounds = {number(field(root, "good_deal_bound", ""), "good_deal_bound")};
    } else if (axis == "good_deal_bound") {
      cfg.axis = SweepAxis::GoodDealBound;
      cfg.bounds = number_list(axis_value, axis_path);
      cfg.initial_prices = {number(field(root, "initial_price", ""), "initial_price")};
    } else if (axis == "generator_models") {
      cfg.axis = SweepAxis::GeneratorModels;
      if (!axis_value.is_array() || axis_value.empty()) fail(axis_path, "expected a non-empty array");
      for (std::size_t n = 0; n < axis_value.size(); ++n) {
        const auto path = element(axis_path, n);
        GeneratorModelSpec spec;
        spec.label = axis_value[n].contains("label")
                         ? text(axis_value[n]["label"], child(path, "label"))
                         : "model " + std::to_string(n + 1);
        spec.generator = matrix(field(axis_value[n], "generator", path), child(path, "generator"));
        cfg.models.push_back(std::move(spec));
      }
      cfg.bounds = number_or_list(field(root, "good_deal_bound", ""), "good_deal_bound");
      cfg.initial_prices = {number(field(root, "initial_price", ""), "initial_price")};
    } else {
      fail(axis_path, "unknown sweep axis");
    }

    if (cfg.axis != SweepAxis::GeneratorModels) {
      cfg.models.push_back(
          {"model 1", matrix(field(market, "generator", "market"), "market.generator")});
    }
    for (std::size_t n = 0; n < cfg.models.size(); ++n) {
      if (cfg.models[n].generator.size() != cfg.regimes.size()) {
        fail(cfg.axis == SweepAxis::GeneratorModels ? element(axis_path, n) : "market.generator",
             "generator has " + std::to_string(cfg.models[n].generator.size()) +
                 " regimes but market.regimes lists " + std::to_string(cfg.regimes.size()));
      }
    }
    for (std::size_t n = 0; n < cfg.initial_prices.size(); ++n) {
      const double s0 = cfg.initial_prices[n];
      if (!(s0 > 0.0) || s0 < cfg.grid.s_min() || s0 > cfg.grid.s_max()) {
        fail(cfg.axis == SweepAxis::InitialPrice ? element(axis_path, n) : "initial_price",
             "initial price must be positive and inside the grid range");
      }
    }

    if (root.contains("solver")) {
      const auto& solver = root["solver"];
      if (!solver.is_object()) fail("solver", "expected an object");
      if (solver.contains("tolerance")) {
        cfg.solver.tolerance = number(solver["tolerance"], "solver.tolerance");
        if (!(cfg.solver.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
      }
      if (solver.contains("max_iterations")) {
        if (!solver["max_iterations"].is_number_integer() || solver["max_iterations"].get<int>() < 1) {
          fail("solver.max_iterations", "expected a positive integer");
        }
        cfg.solver.max_iterations = solver["max_iterations"].get<int>();
      }
    }

    cfg.output = root.contains("output") ? text(root["output"], "output") : cfg.name + ".csv";
    return cfg;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

MarketModel scenario_market(const ScenarioConfig& config, std::size_t model_index, Regime regime,
                            double initial_price) {
  return MarketModel(config.regimes, validate_generator(config.models.at(model_index).generator),
                     regime, initial_price);
}

Claim scenario_claim(const ScenarioConfig& config) {
  return european_call(config.strike, config.maturity);
}

// ---------------------------------------------------------------- Running

ScenarioResult check_scenario(const ScenarioConfig& config) {
  ScenarioResult result;
  result.name = config.name;
  result.axis = config.axis;
  for (std::size_t n = 0; n < config.models.size(); ++n) {
    const auto model = scenario_market(config, n, Regime(1), config.initial_prices.front());
    ModelSummary summary;
    summary.label = config.models[n].label;
    summary.min_bound = min_good_deal_bound(model);
    for (std::size_t i = 0; i < model.regime_count(); ++i) {
      summary.kernels.push_back(diffusion_kernel(model, Regime::from_index(i)));
      summary.holding_times.push_back(mean_holding_time(model.generator(), Regime::from_index(i)));
    }
    for (const double bound : config.bounds) {
      if (!(bound >= summary.min_bound - 1e-12)) {
        throw InfeasibleBoundError::below_minimum(
            "scenario " + config.name + ", " + summary.label, bound, summary.min_bound);
      }
    }
    result.models.push_back(std::move(summary));
  }
  return result;
}

namespace {

enum class Curve { Lower, Mmm, Upper };

struct Task {
  std::size_t model;
  std::size_t bound;  // index into config.bounds; ignored for Mmm
  Curve curve;
};

struct TaskOutput {
  std::vector<double> readings;  // [price * regimes + regime]
  std::vector<int> iterations;
  double max_residual = 0.0;
};

const char* curve_name(Curve c) {
  switch (c) {
    case Curve::Lower:
      return "lower";
    case Curve::Mmm:
      return "mmm";
    case Curve::Upper:
      return "upper";
  }
  return "?";
}

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  std::string out(buffer);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, unsigned threads) {
  ScenarioResult result = check_scenario(config);
  const SolverOptions& options = config.solver;
  const Claim claim = scenario_claim(config);

  std::vector<Task> tasks;
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    tasks.push_back({m, 0, Curve::Mmm});
    for (std::size_t b = 0; b < config.bounds.size(); ++b) {
      tasks.push_back({m, b, Curve::Lower});
      tasks.push_back({m, b, Curve::Upper});
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto model = scenario_market(config, task.model, Regime(1), config.initial_prices.front());
    const double bound = config.bounds[task.bound];
    SolveReport report = [&] {
      try {
        switch (task.curve) {
          case Curve::Mmm:
            return solve_minimal_martingale(model, claim, config.grid, options);
          case Curve::Lower:
            return solve_good_deal(model, claim, config.grid, bound, Direction::Lower, options);
          case Curve::Upper:
            break;
        }
        return solve_good_deal(model, claim, config.grid, bound, Direction::Upper, options);
      } catch (const SolverError& e) {
        std::ostringstream os;
        os << "scenario " << config.name << ", " << config.models[task.model].label << ", "
           << curve_name(task.curve);
        if (task.curve != Curve::Mmm) os << " B = " << bound;
        os << ": " << e.what();
        throw SolverError(os.str());
      }
    }();
    TaskOutput& out = outputs[t];
    for (const double s0 : config.initial_prices) {
      for (const int regime : config.initial_regimes) {
        out.readings.push_back(report.surface.interpolate(s0, Regime(regime)));
      }
    }
    out.iterations = std::move(report.policy_iterations);
    out.max_residual = report.max_policy_residual;
  };

  unsigned workers = threads != 0 ? threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      try {
        run_task(t);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  // Statistics over every solve.
  long long steps = 0, total_iterations = 0;
  for (const auto& out : outputs) {
    ++result.stats.solves;
    for (const int it : out.iterations) {
      result.stats.max_iterations = std::max(result.stats.max_iterations, it);
      total_iterations += it;
      ++steps;
    }
    result.stats.max_residual = std::max(result.stats.max_residual, out.max_residual);
  }
  result.stats.mean_iterations = steps > 0 ? static_cast<double>(total_iterations) / steps : 0.0;

  auto find = [&](std::size_t model, std::size_t bound, Curve curve) -> const TaskOutput& {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto& task = tasks[t];
      if (task.model == model && task.curve == curve && (curve == Curve::Mmm || task.bound == bound)) {
        return outputs[t];
      }
    }
    throw SolverError("scenario: missing solve");
  };

  const std::size_t regimes = config.initial_regimes.size();
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    for (std::size_t b = 0; b < config.bounds.size(); ++b) {
      const auto& lower = find(m, b, Curve::Lower);
      const auto& mmm = find(m, b, Curve::Mmm);
      const auto& upper = find(m, b, Curve::Upper);
      for (std::size_t p = 0; p < config.initial_prices.size(); ++p) {
        for (std::size_t r = 0; r < regimes; ++r) {
          ScenarioRow row;
          row.model = config.axis == SweepAxis::GeneratorModels ? static_cast<int>(m + 1) : 0;
          row.sweep_value = config.axis == SweepAxis::InitialPrice ? config.initial_prices[p]
                                                                   : config.bounds[b];
          row.regime = config.initial_regimes[r];
          const std::size_t at = p * regimes + r;
          row.lower = lower.readings[at];
          row.mmm = mmm.readings[at];
          row.upper = upper.readings[at];
          result.rows.push_back(row);
        }
      }
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ScenarioRow& a, const ScenarioRow& b) {
                     return std::tie(a.model, a.sweep_value, a.regime) <
                            std::tie(b.model, b.sweep_value, b.regime);
                   });
  return result;
}

// ---------------------------------------------------------------- Output

void write_csv(const ScenarioResult& result, std::ostream& out) {
  const bool with_model = result.axis == SweepAxis::GeneratorModels;
  if (with_model) out << "model,";
  out << "sweep_value,regime,lower,mmm,upper\n";
  for (const auto& row : result.rows) {
    if (with_model) out << row.model << ',';
    out << format_fixed(row.sweep_value) << ',' << row.regime << ',' << format_fixed(row.lower)
        << ',' << format_fixed(row.mmm) << ',' << format_fixed(row.upper) << '\n';
  }
}

std::string format_summary(const ScenarioResult& result) {
  std::ostringstream os;
  os << "scenario " << result.name << " (sweep axis: " << to_string(result.axis) << ")\n";
  for (const auto& model : result.models) {
    os << "  " << model.label << ": B0 = " << format_fixed(model.min_bound) << '\n';
    for (std::size_t i = 0; i < model.kernels.size(); ++i) {
      char line[160];
      std::snprintf(line, sizeof line, "    regime %zu: h = %+.6f, h^2 = %.6f, mean holding time = %.3f y\n",
                    i + 1, model.kernels[i], model.kernels[i] * model.kernels[i],
                    model.holding_times[i]);
      os << line;
    }
  }
  if (result.stats.solves > 0) {
    char line[200];
    std::snprintf(line, sizeof line,
                  "  policy iteration: %d solves, mean %.2f / max %d iterations per step, "
                  "max residual %.3e\n",
                  result.stats.solves, result.stats.mean_iterations, result.stats.max_iterations,
                  result.stats.max_residual);
    os << line;
    os << "  rows: " << result.rows.size() << " (good-deal intervals are open)\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> emit_plot_data(const ScenarioResult& result,
                                                  const std::filesystem::path& directory,
                                                  const std::string& stem,
                                                  std::ostream& warnings) {
  std::vector<std::filesystem::path> written;
  if (result.rows.empty()) {
    warnings << "warning: scenario " << result.name << " produced no rows; no plot data written\n";
    return written;
  }

  // (model, regime) -> rows in sweep order.
  std::map<std::pair<int, int>, std::vector<const ScenarioRow*>> series;
  for (const auto& row : result.rows) series[{row.model, row.regime}].push_back(&row);

  std::filesystem::create_directories(directory);
  for (const auto& [key, rows] : series) {
    for (const Curve curve : {Curve::Lower, Curve::Mmm, Curve::Upper}) {
      std::string name = stem;
      if (key.first != 0) name += "_model" + std::to_string(key.first);
      name += "_regime" + std::to_string(key.second) + "_" + curve_name(curve) + ".dat";
      const auto path = directory / name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      out << "# " << to_string(result.axis) << ' ' << curve_name(curve) << '\n';
      for (const auto* row : rows) {
        const double y = curve == Curve::Lower ? row->lower
                         : curve == Curve::Mmm ? row->mmm
                                               : row->upper;
        out << format_fixed(row->sweep_value) << ' ' << format_fixed(y) << '\n';
      }
      if (!out) throw std::runtime_error("failed writing " + path.string());
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace gooddeal
