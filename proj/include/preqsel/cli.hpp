// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "preqsel/csv.hpp"
#include "preqsel/scenario_io.hpp"
#include "preqsel/selection.hpp"
#include "preqsel/simlab.hpp"

namespace preqsel {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnvVar = "PREQSEL_OUT_DIR";

namespace detail {

inline CsvTable trace_table(const ScenarioResult& result) {
  CsvTable table({"rep", "n", "model_id", "cumulative_score"});
  for (std::size_t rep = 0; rep < result.cells.size(); ++rep) {
    for (std::size_t c = 0; c < result.n_grid.size(); ++c) {
      const ReplicationCell& cell = result.cells[rep][c];
      for (std::size_t m = 0; m < result.model_ids.size(); ++m) {
        table.add_row({csv_count(static_cast<long long>(rep)),
                       csv_count(result.n_grid[c]), result.model_ids[m],
                       csv_real(cell.scores[m])});
      }
    }
  }
  return table;
}

inline CsvTable gaps_table(const ScenarioResult& result) {
  CsvTable table({"rep", "n", "gap"});
  for (std::size_t rep = 0; rep < result.cells.size(); ++rep) {
    for (std::size_t c = 0; c < result.n_grid.size(); ++c) {
      table.add_row({csv_count(static_cast<long long>(rep)),
                     csv_count(result.n_grid[c]),
                     csv_real(result.cells[rep][c].gap)});
    }
  }
  return table;
}

inline CsvTable summary_table(const ScenarioResult& result) {
  CsvTable table({"n", "mean_gap", "stderr", "frac_correct"});
  for (const auto& summary : result.summaries) {
    table.add_row({csv_count(summary.n), csv_real(summary.mean_gap),
                   csv_real(summary.stderr_gap),
                   csv_real(summary.frac_correct)});
  }
  return table;
}

inline CsvTable rates_table(const ScenarioResult& result) {
  CsvTable table({"regressor", "slope", "intercept", "r_squared"});
  std::vector<std::pair<double, double>> points;
  for (const auto& summary : result.summaries) {
    if (static_cast<double>(summary.n) >= kRateFitMinN &&
        std::isfinite(summary.mean_gap)) {
      points.emplace_back(static_cast<double>(summary.n), summary.mean_gap);
    }
  }
  if (points.size() >= 4) {
    for (const RateRegressor regressor :
         {RateRegressor::log_n, RateRegressor::n}) {
      const RateEstimate fit = estimate_rate(points, regressor);
      table.add_row({regressor == RateRegressor::log_n ? "log_n" : "n",
                     csv_real(fit.slope), csv_real(fit.intercept),
                     csv_real(fit.r_squared)});
    }
  }
  return table;
}

inline void remove_files(const std::vector<std::string>& paths) {
  for (const auto& path : paths) {
    std::error_code ignored;
    std::filesystem::remove(path, ignored);
  }
}

}  // namespace detail

/// `preqsel run <scenario.json> --out <dir>`: runs the scenario and writes
/// the requested CSV tables. Returns 0 iff every requested table was fully
/// written; on failure any partial output is removed.
inline int run_command(const std::string& scenario_path,
                       const std::string& out_dir_flag, std::ostream& out,
                       std::ostream& err) {
  ScenarioDocument document;
  try {
    document = parse_scenario_file(scenario_path);
  } catch (const std::exception& error) {
    err << "error: " << error.what() << "\n";
    return 2;
  }

  std::string out_dir = out_dir_flag;
  if (out_dir.empty() && document.output.directory.has_value()) {
    out_dir = *document.output.directory;
  }
  if (out_dir.empty()) {
    if (const char* env = std::getenv(kOutDirEnvVar)) out_dir = env;
  }
  if (out_dir.empty()) {
    err << "error: no output directory; pass --out, set output.directory in "
           "the scenario, or export "
        << kOutDirEnvVar << "\n";
    return 2;
  }

  std::vector<std::string> written;
  try {
    std::filesystem::create_directories(out_dir);
    const ScenarioResult result = run_scenario(document.scenario);
    for (const auto& name : document.output.tables) {
      CsvTable table =
          name == "trace"     ? detail::trace_table(result)
          : name == "gaps"    ? detail::gaps_table(result)
          : name == "summary" ? detail::summary_table(result)
                              : detail::rates_table(result);
      const std::string path =
          (std::filesystem::path(out_dir) / (name + ".csv")).string();
      written.push_back(path);
      std::ofstream stream(path, std::ios::binary | std::ios::trunc);
      stream << table.to_string();
      stream.flush();
      if (!stream) {
        throw std::runtime_error("cannot write '" + path + "'");
      }
    }
  } catch (const std::exception& error) {
    detail::remove_files(written);
    err << "error: " << error.what() << "\n";
    return 1;
  }
  out << "wrote " << written.size() << " table(s) to " << out_dir << " for "
      << document.name << "\n";
  return 0;
}

namespace detail {

struct ScoreData {
  Eigen::MatrixXd design;  // intercept column followed by the x columns
  Eigen::VectorXd y;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (const char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

inline ScoreData read_score_csv(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) {
    throw std::runtime_error("cannot open data file '" + path + "'");
  }
  std::string line;
  if (!std::getline(stream, line) || line.empty()) {
    throw std::runtime_error(path + ": missing header row");
  }
  const std::vector<std::string> header = split_csv_line(line);
  int y_column = -1;
  std::vector<std::pair<int, int>> x_columns;  // (x index, column)
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& name = header[static_cast<std::size_t>(c)];
    if (name == "y") {
      if (y_column >= 0) {
        throw std::runtime_error(path + ": duplicate 'y' column");
      }
      y_column = c;
      continue;
    }
    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      x_columns.emplace_back(std::stoi(name.substr(1)), c);
      continue;
    }
    throw std::runtime_error(path + ": unexpected column '" + name +
                             "' (expected y, x1, x2, ...)");
  }
  if (y_column < 0) {
    throw std::runtime_error(path + ": no 'y' column");
  }
  std::sort(x_columns.begin(), x_columns.end());

  std::vector<double> y_values;
  std::vector<std::vector<double>> x_values(x_columns.size());
  int line_number = 1;
  while (std::getline(stream, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path + " line " + std::to_string(line_number) +
                               ": expected " + std::to_string(header.size()) +
                               " cells, found " + std::to_string(cells.size()));
    }
    const auto parse_cell = [&](int column) {
      const std::string& cell = cells[static_cast<std::size_t>(column)];
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return value;
      } catch (const std::exception&) {
        throw std::runtime_error(path + " line " +
                                 std::to_string(line_number) + ": cell '" +
                                 cell + "' is not a number");
      }
    };
    y_values.push_back(parse_cell(y_column));
    for (std::size_t j = 0; j < x_columns.size(); ++j) {
      x_values[j].push_back(parse_cell(x_columns[j].second));
    }
  }
  if (y_values.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }

  ScoreData data;
  const Eigen::Index n = static_cast<Eigen::Index>(y_values.size());
  data.y = Eigen::Map<const Eigen::VectorXd>(y_values.data(), n);
  data.design.resize(n, 1 + static_cast<Eigen::Index>(x_values.size()));
  data.design.col(0).setOnes();
  for (std::size_t j = 0; j < x_values.size(); ++j) {
    data.design.col(1 + static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(x_values[j].data(), n);
  }
  return data;
}

inline std::pair<Eigen::Index, VarianceSpec> parse_model_flag(
    const std::string& flag) {
  std::optional<Eigen::Index> p;
  std::optional<VarianceSpec> variance;
  std::size_t start = 0;
  while (start <= flag.size()) {
    const std::size_t comma = flag.find(',', start);
    const std::string item =
        flag.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    start = comma == std::string::npos ? flag.size() + 1 : comma + 1;
    if (item.empty()) continue;
    if (item == "unknown") {
      variance = UnknownVariance{};
      continue;
    }
    const std::size_t equals = item.find('=');
    const std::string key = item.substr(0, equals);
    if (equals == std::string::npos) {
      throw std::runtime_error("bad model flag item '" + item +
                               "' (expected p=<int>, known=<sigma_sq> or "
                               "unknown)");
    }
    const std::string value = item.substr(equals + 1);
    if (key == "p") {
      p = static_cast<Eigen::Index>(std::stoll(value));
    } else if (key == "known") {
      variance = KnownVariance{std::stod(value)};
    } else {
      throw std::runtime_error("bad model flag key '" + key + "'");
    }
  }
  if (!p.has_value() || *p < 0) {
    throw std::runtime_error("model flag needs p=<non-negative int>: '" +
                             flag + "'");
  }
  if (!variance.has_value()) {
    throw std::runtime_error(
        "model flag needs known=<sigma_sq> or unknown: '" + flag + "'");
  }
  return {*p, *variance};
}

}  // namespace detail

/// `preqsel score <data.csv> --model p=...,known=...`: one-shot multivariate
/// and prequential scoring of user data. A model with p parameters uses the
/// intercept plus the first p - 1 x columns of the CSV.
inline int score_command(const std::string& data_path,
                         const std::vector<std::string>& model_flags,
                         std::ostream& out, std::ostream& err) {
  try {
    if (model_flags.empty()) {
      throw std::runtime_error("at least one --model flag is required");
    }
    const detail::ScoreData data = detail::read_score_csv(data_path);

    std::vector<Candidate> candidates;
    Eigen::Index p_max = 0;
    bool any_unknown = false;
    for (std::size_t m = 0; m < model_flags.size(); ++m) {
      const auto [p, variance] = detail::parse_model_flag(model_flags[m]);
      if (p > data.design.cols()) {
        throw std::runtime_error(
            "model p=" + std::to_string(p) + " needs " + std::to_string(p - 1) +
            " x column(s), data has " + std::to_string(data.design.cols() - 1));
      }
      candidates.push_back({"M" + std::to_string(m + 1),
                            LinearModelSpec(data.design.leftCols(p), variance)});
      p_max = std::max(p_max, p);
      any_unknown |= std::holds_alternative<UnknownVariance>(variance);
    }

    std::vector<std::optional<double>> multivariate(candidates.size());
    std::vector<std::optional<double>> prequential(candidates.size());
    std::optional<SelectionResult> multivariate_result;
    std::optional<SelectionResult> prequential_result;
    try {
      multivariate_result = select_multivariate(data.y, candidates);
      for (std::size_t m = 0; m < candidates.size(); ++m) {
        const auto it =
            multivariate_result->final_scores.find(candidates[m].id);
        if (it != multivariate_result->final_scores.end()) {
          multivariate[m] = it->second;
        }
      }
    } catch (const std::exception&) {
    }
    if (data.y.size() > p_max + (any_unknown ? 2 : 0)) {
      try {
        prequential_result = select_prequential(data.y, candidates);
        for (std::size_t m = 0; m < candidates.size(); ++m) {
          const auto it =
              prequential_result->final_scores.find(candidates[m].id);
          if (it != prequential_result->final_scores.end()) {
            prequential[m] = it->second;
          }
        }
      } catch (const std::exception&) {
      }
    }

    const auto render = [](const std::optional<double>& value) {
      if (!value.has_value()) return std::string("infeasible");
      char buffer[40];
      std::snprintf(buffer, sizeof(buffer), "%.12g", *value);
      return std::string(buffer);
    };
    for (std::size_t m = 0; m < candidates.size(); ++m) {
      out << "model " << candidates[m].id
          << ": multivariate=" << render(multivariate[m])
          << " prequential=" << render(prequential[m]) << "\n";
    }
    if (multivariate_result.has_value()) {
      out << "multivariate selection: " << multivariate_result->chosen << "\n";
    } else {
      out << "multivariate selection: none feasible\n";
    }
    if (prequential_result.has_value()) {
      out << "prequential selection: " << prequential_result->chosen << "\n";
    } else {
      out << "prequential selection: insufficient data\n";
    }
    return 0;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  }
}

}  // namespace preqsel
