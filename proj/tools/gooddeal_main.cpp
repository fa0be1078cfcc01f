// gooddeal: good-deal price bounds for European calls in a regime-switching
// market.
//
//   gooddeal --config scenarios/figure1.json --summary
//   gooddeal --config scenarios/table2.json --check
//   gooddeal --config scenarios/figure2.json --output out.csv --plot-dir plots/
//
// Exit codes: 0 success, 1 configuration error, 2 infeasible good-deal
// bound, 3 solver failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gooddeal/errors.hpp"
#include "gooddeal/scenario.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 1, kInfeasible = 2, kSolver = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Good-deal price bounds in a regime-switching diffusion market"};

  std::string config_path;
  std::string output_path;
  std::string plot_dir;
  bool summary = false;
  bool check_only = false;
  unsigned threads = 0;

  app.add_option("--config", config_path, "JSON scenario file")->required();
  app.add_option("--output", output_path, "CSV output path (overrides the config)");
  app.add_flag("--summary", summary, "Print a human-readable summary");
  app.add_flag("--check", check_only, "Validate the config and print B0 and h(i) without solving");
  app.add_option("--plot-dir", plot_dir, "Also write one xy file per regime and curve here");
  app.add_option("--threads", threads, "Concurrent solves (0: hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const gooddeal::ScenarioConfig config = gooddeal::load_scenario(config_path);

    if (check_only) {
      std::cout << gooddeal::format_summary(gooddeal::check_scenario(config));
      return kOk;
    }

    const gooddeal::ScenarioResult result = gooddeal::run_scenario(config, threads);

    const std::filesystem::path csv_path = output_path.empty() ? config.output : output_path;
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) {
      std::cerr << "error: cannot write " << csv_path.string() << '\n';
      return kConfig;
    }
    gooddeal::write_csv(result, csv);
    csv.close();

    if (!plot_dir.empty()) {
      const auto files =
          gooddeal::emit_plot_data(result, plot_dir, csv_path.stem().string(), std::cerr);
      if (summary) std::cout << "plot data: " << files.size() << " files in " << plot_dir << '\n';
    }
    if (summary) {
      std::cout << gooddeal::format_summary(result);
      std::cout << "  csv: " << csv_path.string() << '\n';
    }
    return kOk;
  } catch (const gooddeal::InfeasibleBoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const gooddeal::SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  } catch (const gooddeal::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
}
