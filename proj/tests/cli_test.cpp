#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = GOODDEAL_SCENARIO_DIR;

int run(const std::string& args) {
  const std::string command = std::string("\"") + GOODDEAL_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gooddeal_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// figure1 with a coarser grid and the given edits applied.
fs::path write_config(const fs::path& dir, const std::string& from, const std::string& to) {
  std::string text = read(kScenarios / "figure1.json");
  auto replace = [&text](const std::string& a, const std::string& b) {
    const auto at = text.find(a);
    if (at != std::string::npos) text.replace(at, a.size(), b);
  };
  replace("\"dt\": 0.01", "\"dt\": 0.05");
  replace("\"ds\": 0.5", "\"ds\": 2");
  if (!from.empty()) replace(from, to);
  const auto path = dir / "config.json";
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, CheckSucceedsOnBundledScenarios) {
  for (const char* name : {"figure1.json", "figure2.json", "table2.json"}) {
    EXPECT_EQ(run("--check --config \"" + (kScenarios / name).string() + "\""), 0) << name;
  }
}

TEST(Cli, WritesCsvAndPlotData) {
  const auto dir = scratch("run");
  const auto config = write_config(dir, "", "");
  const auto csv = dir / "out.csv";
  EXPECT_EQ(run("--config \"" + config.string() + "\" --output \"" + csv.string() +
                "\" --plot-dir \"" + (dir / "plots").string() + "\" --threads 2"),
            0);
  const auto text = read(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "sweep_value,regime,lower,mmm,upper");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 35);
  EXPECT_TRUE(fs::exists(dir / "plots" / "out_regime1_lower.dat"));
  EXPECT_TRUE(fs::exists(dir / "plots" / "out_regime2_upper.dat"));
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(run("--config \"" + (dir / "missing.json").string() + "\""), 1);
  EXPECT_EQ(run("--check --config \"" + write_config(dir, "\"sigma\": 0.26", "\"sigma\": -1").string() + "\""), 1);
  EXPECT_EQ(run("--check --config \"" + write_config(dir, "\"good_deal_bound\": 1.2", "\"good_deal_bound\": 1.1").string() + "\""), 2);
  EXPECT_EQ(run("--output \"" + (dir / "x.csv").string() + "\" --config \"" +
                write_config(dir, "\"output\"", "\"solver\": {\"max_iterations\": 1}, \"output\"").string() + "\""),
            3);
  EXPECT_EQ(run("--no-such-flag"), 1);
  fs::remove_all(dir);
}
