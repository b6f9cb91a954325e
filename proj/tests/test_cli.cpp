// Apache License, Version 2.0, refer to LICENSE.txt
//
// End-to-end checks of the installed binary: spawns the real executable,
// captures its streams, and compares output files byte for byte.

#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#ifndef PREQSEL_CLI_PATH
#error "PREQSEL_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args, const fs::path& sink) {
  const std::string command = std::string(PREQSEL_CLI_PATH) + " " + args +
                              " >" + sink.string() + " 2>&1";
  const int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream stream(sink);
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream stream(path, std::ios::binary);
  REQUIRE(stream.good());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

class TempDir {
 public:
  TempDir() {
    root_ = fs::temp_directory_path() /
            ("preqsel_cli_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(root_);
  }
  ~TempDir() {
    std::error_code ignored;
    fs::remove_all(root_, ignored);
  }
  const fs::path& path() const { return root_; }

 private:
  static inline int counter_ = 0;
  fs::path root_;
};

const char* kScenario = R"({
  "name": "cli-smoke",
  "truth": { "p": 0, "sigma_sq": 1.0, "design": { "intercept": true } },
  "candidates": [
    { "id": "M1", "p": 0, "variance": { "known": 1.0 } },
    { "id": "M2", "p": 1, "variance": { "known": 1.0 } }
  ],
  "run": { "n_grid": [100, 215, 464, 1000], "replications": 25, "seed": 7 }
})";

}  // namespace

TEST_CASE("version prints the release string") {
  TempDir dir;
  const CommandResult result = run_cli("version", dir.path() / "out.txt");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("preqsel 0.1.0") != std::string::npos);
}

TEST_CASE("run writes all tables and reruns are byte-identical") {
  TempDir dir;
  const fs::path scenario_path = dir.path() / "scenario.json";
  std::ofstream(scenario_path) << kScenario;

  const fs::path out1 = dir.path() / "out1";
  const fs::path out2 = dir.path() / "out2";
  const CommandResult run1 = run_cli(
      "run " + scenario_path.string() + " --out " + out1.string(),
      dir.path() / "log1.txt");
  REQUIRE(run1.exit_code == 0);
  const CommandResult run2 = run_cli(
      "run " + scenario_path.string() + " --out " + out2.string(),
      dir.path() / "log2.txt");
  REQUIRE(run2.exit_code == 0);

  for (const std::string table : {"trace", "gaps", "summary", "rates"}) {
    const fs::path file1 = out1 / (table + ".csv");
    const fs::path file2 = out2 / (table + ".csv");
    REQUIRE(fs::exists(file1));
    REQUIRE(fs::exists(file2));
    CHECK(read_file(file1) == read_file(file2));
  }

  const std::string summary = read_file(out1 / "summary.csv");
  CHECK(summary.rfind("n,mean_gap,stderr,frac_correct\n", 0) == 0);
  const std::string rates = read_file(out1 / "rates.csv");
  CHECK(rates.rfind("regressor,slope,intercept,r_squared\n", 0) == 0);
  CHECK(rates.find("log_n,") != std::string::npos);
}

TEST_CASE("run falls back to the output-directory environment variable") {
  TempDir dir;
  const fs::path scenario_path = dir.path() / "scenario.json";
  std::ofstream(scenario_path) << kScenario;
  const fs::path out = dir.path() / "env_out";

  const std::string command = "PREQSEL_OUT_DIR=" + out.string() + " " +
                              PREQSEL_CLI_PATH + " run " +
                              scenario_path.string() + " >" +
                              (dir.path() / "log.txt").string() + " 2>&1";
  const int status = std::system(command.c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(out / "summary.csv"));

  // With neither --out, output.directory, nor the variable: an error.
  const std::string bare = std::string(PREQSEL_CLI_PATH) + " run " +
                           scenario_path.string() + " >" +
                           (dir.path() / "log2.txt").string() + " 2>&1";
  const int bare_status = std::system(("PREQSEL_OUT_DIR= " + bare).c_str());
  CHECK(WEXITSTATUS(bare_status) != 0);
}

TEST_CASE("run fails cleanly on bad scenarios and unwritable outputs") {
  TempDir dir;
  const CommandResult missing =
      run_cli("run " + (dir.path() / "nope.json").string() + " --out " +
                  (dir.path() / "o").string(),
              dir.path() / "log.txt");
  CHECK(missing.exit_code != 0);

  const fs::path bad_scenario = dir.path() / "bad.json";
  std::ofstream(bad_scenario) << R"({
    "truth": { "p": 0, "sigma_sq": 1.0 },
    "candidates": [ { "p": 0, "varaince": "unknown" } ],
    "run": { "n_grid": [10], "seed": 1 }
  })";
  const CommandResult typo = run_cli(
      "run " + bad_scenario.string() + " --out " + (dir.path() / "o").string(),
      dir.path() / "log.txt");
  CHECK(typo.exit_code != 0);
  CHECK(typo.output.find("varaince") != std::string::npos);

  // Output directory nested under a regular file cannot be created.
  const fs::path blocker = dir.path() / "blocker.txt";
  std::ofstream(blocker) << "file";
  const fs::path scenario_path = dir.path() / "scenario.json";
  std::ofstream(scenario_path) << kScenario;
  const fs::path bad_out = blocker / "out";
  const CommandResult unwritable = run_cli(
      "run " + scenario_path.string() + " --out " + bad_out.string(),
      dir.path() / "log.txt");
  CHECK(unwritable.exit_code != 0);
  CHECK_FALSE(fs::exists(bad_out / "trace.csv"));
}

TEST_CASE("score command evaluates candidates on a data csv") {
  TempDir dir;
  const fs::path data_path = dir.path() / "data.csv";
  std::ofstream(data_path) << "y\n1\n-1\n1\n-1\n";

  const CommandResult result = run_cli(
      "score " + data_path.string() +
          " --model p=0,known=1 --model p=1,known=1",
      dir.path() / "log.txt");
  REQUIRE(result.exit_code == 0);
  // ybar = 0, so n*ybar^2 = 0 < 2 and the simpler model wins.
  CHECK(result.output.find("multivariate selection: M1") != std::string::npos);
  CHECK(result.output.find("model M1: multivariate=") != std::string::npos);
  CHECK(result.output.find("prequential selection:") != std::string::npos);

  const CommandResult empty = run_cli(
      "score " + data_path.string() + " --model p=0,known=1",
      dir.path() / "log.txt");
  CHECK(empty.exit_code == 0);
  CHECK(empty.output.find("multivariate selection: M1") != std::string::npos);

  const fs::path empty_path = dir.path() / "empty.csv";
  std::ofstream(empty_path) << "y\n";
  const CommandResult no_rows = run_cli(
      "score " + empty_path.string() + " --model p=0,known=1",
      dir.path() / "log.txt");
  CHECK(no_rows.exit_code != 0);

  const fs::path bad_path = dir.path() / "bad.csv";
  std::ofstream(bad_path) << "y\n1\nnot-a-number\n";
  const CommandResult bad = run_cli(
      "score " + bad_path.string() + " --model p=0,known=1",
      dir.path() / "log.txt");
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("line 3") != std::string::npos);
}
