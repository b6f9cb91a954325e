// Apache License, Version 2.0, refer to LICENSE.txt
//
// Command-line front end: `run` executes a scenario file and writes CSV
// tables, `score` evaluates candidate models on a user-supplied data CSV,
// `version` prints the release string.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "preqsel/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prequential model selection with homogeneous proper scores"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  CLI::App* run = app.add_subcommand(
      "run", "Run a scenario file and write CSV tables");
  run->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  run->add_option("--out", out_dir,
                  "Output directory (default: scenario output.directory, "
                  "then $PREQSEL_OUT_DIR)");

  std::string data_path;
  std::vector<std::string> model_flags;
  CLI::App* score = app.add_subcommand(
      "score", "Score a data CSV (column y, optional x1, x2, ...) under "
               "candidate models");
  score->add_option("data", data_path, "Data CSV file")->required();
  score
      ->add_option("--model", model_flags,
                   "Candidate model, e.g. p=1,known=1.0 or p=2,unknown; a "
                   "model with p parameters uses the intercept plus the "
                   "first p-1 x columns")
      ->required();

  CLI::App* version = app.add_subcommand("version", "Print version");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return preqsel::run_command(scenario_path, out_dir, std::cout, std::cerr);
  }
  if (score->parsed()) {
    return preqsel::score_command(data_path, model_flags, std::cout,
                                  std::cerr);
  }
  if (version->parsed()) {
    std::cout << "preqsel " << preqsel::kVersion << "\n";
    return 0;
  }
  return 1;
}
