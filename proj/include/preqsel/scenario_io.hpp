// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "preqsel/simlab.hpp"

namespace preqsel {

/// Raised for malformed or semantically invalid scenario files. Parse errors
/// carry line/column; semantic errors name the offending field.
class scenario_error : public std::runtime_error {
 public:
  explicit scenario_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct OutputConfig {
  std::optional<std::string> directory;
  std::vector<std::string> tables = {"trace", "gaps", "summary", "rates"};

  bool operator==(const OutputConfig&) const = default;
};

/// A parsed scenario file: the Scenario itself plus presentation details
/// (name, output configuration) that only the CLI cares about.
struct ScenarioDocument {
  std::string name = "scenario";
  Scenario scenario;
  OutputConfig output;
};

inline bool operator==(const DesignDistribution& a,
                       const DesignDistribution& b) {
  return a.intercept == b.intercept;
}

inline bool operator==(const TruthSpec& a, const TruthSpec& b) {
  return a.p == b.p && a.theta.size() == b.theta.size() &&
         (a.theta.array() == b.theta.array()).all() &&
         a.sigma_sq == b.sigma_sq && a.design == b.design;
}

inline bool operator==(const CandidateSpec& a, const CandidateSpec& b) {
  return a.id == b.id && a.p == b.p && a.variance == b.variance;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.mode == b.mode && a.alignment == b.alignment &&
         a.n_grid == b.n_grid && a.replications == b.replications &&
         a.seed == b.seed;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  return a.truth == b.truth && a.candidates == b.candidates && a.run == b.run;
}

inline bool operator==(const ScenarioDocument& a, const ScenarioDocument& b) {
  return a.name == b.name && a.scenario == b.scenario && a.output == b.output;
}

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& object, const std::string& context,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const auto& candidate : allowed) {
      if (key == candidate) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw scenario_error("unknown key '" + key + "' in " + context);
    }
  }
}

inline const json& require_field(const json& object, const std::string& key,
                                 const std::string& context) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw scenario_error("missing field '" + key + "' in " + context);
  }
  return *it;
}

inline double positive_real(const json& value, const std::string& field) {
  if (!value.is_number()) {
    throw scenario_error("field '" + field + "' must be a number");
  }
  const double real = value.get<double>();
  if (!(real > 0.0) || !std::isfinite(real)) {
    throw scenario_error("field '" + field + "' must be positive and finite");
  }
  return real;
}

inline Eigen::Index nonnegative_int(const json& value,
                                    const std::string& field) {
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
    throw scenario_error("field '" + field +
                         "' must be a non-negative integer");
  }
  return static_cast<Eigen::Index>(value.get<std::int64_t>());
}

inline VarianceSpec parse_variance(const json& value,
                                   const std::string& context) {
  if (value.is_string()) {
    if (value.get<std::string>() == "unknown") return UnknownVariance{};
    throw scenario_error("field 'variance' in " + context +
                         " must be \"unknown\" or {\"known\": sigma_sq}");
  }
  if (value.is_object()) {
    require_keys(value, context + ".variance", {"known"});
    return KnownVariance{
        positive_real(require_field(value, "known", context + ".variance"),
                      context + ".variance.known")};
  }
  throw scenario_error("field 'variance' in " + context +
                       " must be \"unknown\" or {\"known\": sigma_sq}");
}

inline std::pair<int, int> line_and_column(const std::string& text,
                                           std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Parses a scenario document, rejecting unknown keys anywhere (strict
/// mode) and materialising all defaults.
inline ScenarioDocument parse_scenario_text(const std::string& text,
                                            const std::string& source) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& error) {
    const auto [line, column] = detail::line_and_column(text, error.byte);
    std::ostringstream message;
    message << source << ":" << line << ":" << column
            << ": " << error.what();
    throw scenario_error(message.str());
  }

  try {
    if (!root.is_object()) {
      throw scenario_error("scenario document must be a JSON object");
    }
    detail::require_keys(root, "scenario document",
                         {"name", "truth", "candidates", "run", "output"});

    ScenarioDocument document;
    if (root.contains("name")) {
      if (!root["name"].is_string()) {
        throw scenario_error("field 'name' must be a string");
      }
      document.name = root["name"].get<std::string>();
    }

    const json& truth = detail::require_field(root, "truth", "document");
    detail::require_keys(truth, "truth", {"p", "theta", "sigma_sq", "design"});
    TruthSpec& truth_spec = document.scenario.truth;
    truth_spec.p =
        detail::nonnegative_int(detail::require_field(truth, "p", "truth"),
                                "truth.p");
    truth_spec.sigma_sq = detail::positive_real(
        detail::require_field(truth, "sigma_sq", "truth"), "truth.sigma_sq");
    truth_spec.theta = Eigen::VectorXd::Zero(truth_spec.p);
    if (truth.contains("theta")) {
      const json& theta = truth["theta"];
      if (!theta.is_array() ||
          static_cast<Eigen::Index>(theta.size()) != truth_spec.p) {
        throw scenario_error(
            "field 'truth.theta' must be an array of length truth.p");
      }
      for (Eigen::Index j = 0; j < truth_spec.p; ++j) {
        if (!theta[static_cast<std::size_t>(j)].is_number()) {
          throw scenario_error("field 'truth.theta' must contain numbers");
        }
        truth_spec.theta(j) = theta[static_cast<std::size_t>(j)].get<double>();
      }
    }
    if (truth.contains("design")) {
      const json& design = truth["design"];
      detail::require_keys(design, "truth.design", {"intercept"});
      if (design.contains("intercept")) {
        if (!design["intercept"].is_boolean()) {
          throw scenario_error(
              "field 'truth.design.intercept' must be a boolean");
        }
        truth_spec.design.intercept = design["intercept"].get<bool>();
      }
    }

    const json& candidates =
        detail::require_field(root, "candidates", "document");
    if (!candidates.is_array() || candidates.empty()) {
      throw scenario_error("field 'candidates' must be a non-empty array");
    }
    for (std::size_t m = 0; m < candidates.size(); ++m) {
      const std::string context = "candidates[" + std::to_string(m) + "]";
      const json& entry = candidates[m];
      if (!entry.is_object()) {
        throw scenario_error(context + " must be an object");
      }
      detail::require_keys(entry, context, {"id", "p", "variance"});
      CandidateSpec spec;
      spec.id = "M" + std::to_string(m + 1);
      if (entry.contains("id")) {
        if (!entry["id"].is_string() || entry["id"].get<std::string>().empty()) {
          throw scenario_error("field 'id' in " + context +
                               " must be a non-empty string");
        }
        spec.id = entry["id"].get<std::string>();
      }
      if (spec.id.find(',') != std::string::npos ||
          spec.id.find('\n') != std::string::npos) {
        throw scenario_error("field 'id' in " + context +
                             " must not contain commas or newlines");
      }
      spec.p = detail::nonnegative_int(
          detail::require_field(entry, "p", context), context + ".p");
      spec.variance = detail::parse_variance(
          detail::require_field(entry, "variance", context), context);
      document.scenario.candidates.push_back(std::move(spec));
    }

    const json& run = detail::require_field(root, "run", "document");
    detail::require_keys(
        run, "run", {"mode", "alignment", "n_grid", "replications", "seed"});
    RunConfig& config = document.scenario.run;
    if (run.contains("mode")) {
      const std::string mode = run["mode"].is_string()
                                   ? run["mode"].get<std::string>()
                                   : std::string();
      if (mode == "prequential") {
        config.mode = SelectionMode::prequential;
      } else if (mode == "multivariate") {
        config.mode = SelectionMode::multivariate;
      } else {
        throw scenario_error(
            "field 'run.mode' must be \"prequential\" or \"multivariate\"");
      }
    }
    if (run.contains("alignment")) {
      const std::string alignment = run["alignment"].is_string()
                                        ? run["alignment"].get<std::string>()
                                        : std::string();
      if (alignment == "skip_head") {
        config.alignment = Alignment::skip_head;
      } else if (alignment == "hybrid_head") {
        config.alignment = Alignment::hybrid_head;
      } else {
        throw scenario_error(
            "field 'run.alignment' must be \"skip_head\" or \"hybrid_head\"");
      }
    }
    const json& grid = detail::require_field(run, "n_grid", "run");
    if (!grid.is_array() || grid.empty()) {
      throw scenario_error("field 'run.n_grid' must be a non-empty array");
    }
    for (const auto& value : grid) {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
        throw scenario_error(
            "field 'run.n_grid' must contain positive integers");
      }
      config.n_grid.push_back(
          static_cast<Eigen::Index>(value.get<std::int64_t>()));
    }
    if (run.contains("replications")) {
      const json& reps = run["replications"];
      if (!reps.is_number_integer() || reps.get<std::int64_t>() < 1) {
        throw scenario_error(
            "field 'run.replications' must be a positive integer");
      }
      config.replications = static_cast<int>(reps.get<std::int64_t>());
    }
    const json& seed = detail::require_field(run, "seed", "run");
    if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0) {
      throw scenario_error(
          "field 'run.seed' must be a non-negative integer");
    }
    config.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());

    if (root.contains("output")) {
      const json& output = root["output"];
      detail::require_keys(output, "output", {"directory", "tables"});
      if (output.contains("directory")) {
        if (!output["directory"].is_string()) {
          throw scenario_error("field 'output.directory' must be a string");
        }
        document.output.directory = output["directory"].get<std::string>();
      }
      if (output.contains("tables")) {
        const json& tables = output["tables"];
        if (!tables.is_array()) {
          throw scenario_error("field 'output.tables' must be an array");
        }
        document.output.tables.clear();
        for (const auto& value : tables) {
          const std::string table =
              value.is_string() ? value.get<std::string>() : std::string();
          if (table != "trace" && table != "gaps" && table != "summary" &&
              table != "rates") {
            throw scenario_error(
                "field 'output.tables' entries must be one of trace, gaps, "
                "summary, rates");
          }
          document.output.tables.push_back(table);
        }
      }
    }

    try {
      validate_scenario(document.scenario);
    } catch (const std::invalid_argument& error) {
      throw scenario_error(error.what());
    }
    return document;
  } catch (const scenario_error&) {
    throw;
  } catch (const json::exception& error) {
    throw scenario_error(source + ": " + error.what());
  }
}

inline ScenarioDocument parse_scenario_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw scenario_error("cannot open scenario file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_scenario_text(buffer.str(), path);
}

/// Canonical serialisation with every default materialised; parsing the
/// output reproduces the document exactly.
inline std::string serialize_scenario(const ScenarioDocument& document) {
  nlohmann::ordered_json root;
  root["name"] = document.name;

  nlohmann::ordered_json truth;
  truth["p"] = document.scenario.truth.p;
  truth["theta"] = std::vector<double>(
      document.scenario.truth.theta.data(),
      document.scenario.truth.theta.data() + document.scenario.truth.p);
  truth["sigma_sq"] = document.scenario.truth.sigma_sq;
  truth["design"] = {{"intercept", document.scenario.truth.design.intercept}};
  root["truth"] = truth;

  root["candidates"] = nlohmann::ordered_json::array();
  for (const auto& candidate : document.scenario.candidates) {
    nlohmann::ordered_json entry;
    entry["id"] = candidate.id;
    entry["p"] = candidate.p;
    if (const auto* known = std::get_if<KnownVariance>(&candidate.variance)) {
      entry["variance"] = {{"known", known->value}};
    } else {
      entry["variance"] = "unknown";
    }
    root["candidates"].push_back(entry);
  }

  nlohmann::ordered_json run;
  run["mode"] = document.scenario.run.mode == SelectionMode::prequential
                    ? "prequential"
                    : "multivariate";
  run["alignment"] =
      document.scenario.run.alignment == Alignment::skip_head ? "skip_head"
                                                              : "hybrid_head";
  run["n_grid"] = document.scenario.run.n_grid;
  run["replications"] = document.scenario.run.replications;
  run["seed"] = document.scenario.run.seed;
  root["run"] = run;

  nlohmann::ordered_json output;
  if (document.output.directory.has_value()) {
    output["directory"] = *document.output.directory;
  }
  output["tables"] = document.output.tables;
  root["output"] = output;

  return root.dump(2) + "\n";
}

}  // namespace preqsel
