// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "preqsel/linear_model.hpp"
#include "preqsel/rng.hpp"
#include "preqsel/selection.hpp"

namespace preqsel {

/// Distribution of design rows: i.i.d. standard normal coordinates, with an
/// optional leading all-ones intercept coordinate.
struct DesignDistribution {
  bool intercept = false;
};

/// The data-generating truth: y_i = x_i[0:p] . theta + sigma eps_i.
struct TruthSpec {
  Eigen::Index p = 0;
  Eigen::VectorXd theta;
  double sigma_sq = 1.0;
  DesignDistribution design;
};

/// A candidate model: uses the first p generated design columns.
struct CandidateSpec {
  std::string id;
  Eigen::Index p = 0;
  VarianceSpec variance;
};

enum class SelectionMode { multivariate, prequential };

struct RunConfig {
  SelectionMode mode = SelectionMode::prequential;
  Alignment alignment = Alignment::skip_head;
  std::vector<Eigen::Index> n_grid;
  int replications = 500;
  std::uint64_t seed = 0;
};

/// A declarative Monte Carlo experiment: truth, candidates, checkpoints,
/// replication count, seed, and how candidates are scored.
struct Scenario {
  TruthSpec truth;
  std::vector<CandidateSpec> candidates;
  RunConfig run;
};

inline void validate_scenario(const Scenario& scenario) {
  const TruthSpec& truth = scenario.truth;
  if (truth.p < 0 || truth.theta.size() != truth.p) {
    throw std::invalid_argument(
        "scenario: truth.theta length must equal truth.p");
  }
  if (!(truth.sigma_sq > 0.0) || !std::isfinite(truth.sigma_sq)) {
    throw std::invalid_argument("scenario: truth.sigma_sq must be positive");
  }
  if (!truth.theta.allFinite()) {
    throw std::invalid_argument("scenario: truth.theta must be finite");
  }
  if (scenario.candidates.empty()) {
    throw std::invalid_argument("scenario: at least one candidate required");
  }
  for (std::size_t m = 0; m < scenario.candidates.size(); ++m) {
    const CandidateSpec& candidate = scenario.candidates[m];
    if (candidate.p < 0) {
      throw std::invalid_argument("scenario: candidate p must be >= 0");
    }
    if (candidate.id.empty()) {
      throw std::invalid_argument("scenario: candidate id must be non-empty");
    }
    for (std::size_t other = 0; other < m; ++other) {
      if (scenario.candidates[other].id == candidate.id) {
        throw std::invalid_argument("scenario: duplicate candidate id '" +
                                    candidate.id + "'");
      }
    }
    if (const auto* known = std::get_if<KnownVariance>(&candidate.variance)) {
      if (!(known->value > 0.0) || !std::isfinite(known->value)) {
        throw std::invalid_argument(
            "scenario: candidate known variance must be positive");
      }
    }
  }
  const auto& grid = scenario.run.n_grid;
  if (grid.empty()) {
    throw std::invalid_argument("scenario: n_grid must be non-empty");
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < 1 || (j > 0 && grid[j] <= grid[j - 1])) {
      throw std::invalid_argument(
          "scenario: n_grid must be strictly increasing and positive");
    }
  }
  if (scenario.run.replications < 1) {
    throw std::invalid_argument("scenario: replications must be >= 1");
  }
}

/// Runs fn(0), ..., fn(count - 1) across hardware threads. Results must be
/// written to per-index slots; any aggregation the caller performs afterwards
/// in index order is then independent of the thread schedule.
template <typename Fn>
inline void parallel_for_index(std::size_t count, Fn&& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (failure) std::rethrow_exception(failure);
}

struct GeneratedData {
  Eigen::MatrixXd design;  // n_max x max(p_true, max candidate p)
  Eigen::VectorXd y;
};

inline Eigen::Index design_columns(const Scenario& scenario) {
  Eigen::Index cols = scenario.truth.p;
  for (const auto& candidate : scenario.candidates) {
    cols = std::max(cols, candidate.p);
  }
  return cols;
}

/// Draws one replication of the scenario: design rows i.i.d. from the
/// configured row distribution, then y = X theta + sigma eps. Deterministic
/// given (seed, replication); the design and the noise consume separate
/// generator streams.
inline GeneratedData generate_data(const Scenario& scenario,
                                   std::size_t replication) {
  validate_scenario(scenario);
  const Eigen::Index n = scenario.run.n_grid.back();
  const Eigen::Index cols = design_columns(scenario);

  GeneratedData data;
  data.design.resize(n, cols);
  CounterRng design_rng(scenario.run.seed, replication, /*stream=*/0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j == 0 && scenario.truth.design.intercept) {
        data.design(i, j) = 1.0;
      } else {
        data.design(i, j) = design_rng.next_normal();
      }
    }
  }

  data.y.resize(n);
  CounterRng noise_rng(scenario.run.seed, replication, /*stream=*/1);
  const double sigma = std::sqrt(scenario.truth.sigma_sq);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mean = 0.0;
    for (Eigen::Index j = 0; j < scenario.truth.p; ++j) {
      mean += data.design(i, j) * scenario.truth.theta(j);
    }
    data.y(i) = mean + sigma * noise_rng.next_normal();
  }
  return data;
}

inline std::vector<Candidate> materialize_candidates(
    const Scenario& scenario, const GeneratedData& data) {
  std::vector<Candidate> candidates;
  candidates.reserve(scenario.candidates.size());
  for (const auto& spec : scenario.candidates) {
    candidates.push_back(
        {spec.id, LinearModelSpec(data.design.leftCols(spec.p),
                                  spec.variance)});
  }
  return candidates;
}

/// The candidate a consistent criterion should settle on: the lowest-p
/// candidate whose column span covers every non-zero truth coefficient and
/// whose variance specification matches the truth (unknown always matches).
/// Returns -1 when no candidate contains the truth.
inline int correct_candidate_index(const Scenario& scenario) {
  Eigen::Index needed = 0;
  for (Eigen::Index j = 0; j < scenario.truth.theta.size(); ++j) {
    if (scenario.truth.theta(j) != 0.0) needed = j + 1;
  }
  int best = -1;
  for (int m = 0; m < static_cast<int>(scenario.candidates.size()); ++m) {
    const CandidateSpec& candidate = scenario.candidates[m];
    if (candidate.p < needed) continue;
    if (const auto* known = std::get_if<KnownVariance>(&candidate.variance)) {
      if (known->value != scenario.truth.sigma_sq) continue;
    }
    if (best < 0 || candidate.p < scenario.candidates[best].p) best = m;
  }
  return best;
}

/// One (replication, checkpoint) cell: per-candidate scores, feasibility,
/// the chosen index (-1 if nothing was feasible), and the score gap
/// candidates[1] - candidates[0] when both are feasible.
struct ReplicationCell {
  std::vector<double> scores;
  std::vector<bool> feasible;
  int chosen = -1;
  double gap = std::numeric_limits<double>::quiet_NaN();
};

struct CheckpointSummary {
  Eigen::Index n = 0;
  double mean_gap = std::numeric_limits<double>::quiet_NaN();
  double stderr_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> frac_chosen;
  double frac_correct = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioResult {
  std::vector<std::string> model_ids;
  std::vector<Eigen::Index> n_grid;
  int correct_index = -1;
  std::vector<std::vector<ReplicationCell>> cells;  // [replication][checkpoint]
  std::vector<CheckpointSummary> summaries;
};

namespace detail {

inline ReplicationCell make_cell(const std::vector<double>& scores,
                                 const std::vector<bool>& feasible) {
  ReplicationCell cell;
  cell.scores = scores;
  cell.feasible = feasible;
  cell.chosen = select_minimum_feasible(scores, feasible);
  if (scores.size() >= 2 && feasible[0] && feasible[1]) {
    cell.gap = scores[1] - scores[0];
  }
  return cell;
}

inline std::vector<ReplicationCell> run_replication_prequential(
    const Scenario& scenario, std::size_t replication) {
  const GeneratedData data = generate_data(scenario, replication);
  PrequentialScorer scorer(materialize_candidates(scenario, data),
                           scenario.run.alignment);
  std::vector<ReplicationCell> cells;
  cells.reserve(scenario.run.n_grid.size());
  std::size_t checkpoint = 0;
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    scorer.advance(data.y(i));
    if (i + 1 == scenario.run.n_grid[checkpoint]) {
      cells.push_back(make_cell(scorer.totals(), scorer.feasible()));
      if (++checkpoint == scenario.run.n_grid.size()) break;
    }
  }
  return cells;
}

inline std::vector<ReplicationCell> run_replication_multivariate(
    const Scenario& scenario, std::size_t replication) {
  const GeneratedData data = generate_data(scenario, replication);
  const std::vector<Candidate> candidates =
      materialize_candidates(scenario, data);
  const std::size_t count = candidates.size();

  std::vector<std::optional<RlsState>> states(count);
  std::vector<std::vector<double>> heads(count);
  std::vector<ReplicationCell> cells;
  cells.reserve(scenario.run.n_grid.size());
  std::size_t checkpoint = 0;

  for (std::size_t m = 0; m < count; ++m) {
    if (candidates[m].model.p() == 0) {
      states[m] = rls_init(candidates[m].model, Eigen::VectorXd(0));
    }
  }
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    for (std::size_t m = 0; m < count; ++m) {
      const LinearModelSpec& model = candidates[m].model;
      if (!states[m].has_value()) {
        heads[m].push_back(data.y(i));
        if (static_cast<Eigen::Index>(heads[m].size()) == model.p()) {
          states[m] = rls_init(model, Eigen::Map<const Eigen::VectorXd>(
                                          heads[m].data(), model.p()));
        }
        continue;
      }
      states[m] = rls_update(*states[m], model.row(i), data.y(i)).first;
    }
    if (i + 1 == scenario.run.n_grid[checkpoint]) {
      std::vector<double> scores(count,
                                 std::numeric_limits<double>::quiet_NaN());
      std::vector<bool> feasible(count, false);
      for (std::size_t m = 0; m < count; ++m) {
        const LinearModelSpec& model = candidates[m].model;
        if (!states[m].has_value()) continue;
        const double n_seen = static_cast<double>(i + 1);
        const double p = static_cast<double>(model.p());
        const double dof = n_seen - p;
        const double rss = states[m]->rss;
        if (model.has_known_variance()) {
          if (dof < 1.0) continue;
          const double sigma_sq = model.known_variance();
          scores[m] = (rss - 2.0 * dof * sigma_sq) / (sigma_sq * sigma_sq);
          feasible[m] = true;
        } else {
          if (n_seen < p + 2.0 || !(rss > 0.0)) continue;
          scores[m] = -(dof - 4.0) * dof / rss;
          feasible[m] = true;
        }
      }
      cells.push_back(make_cell(scores, feasible));
      if (++checkpoint == scenario.run.n_grid.size()) break;
    }
  }
  return cells;
}

}  // namespace detail

/// Runs the whole scenario: every replication and checkpoint, with
/// per-checkpoint aggregation across replications. Replications execute in
/// parallel and are reduced in replication order, so the output is
/// deterministic for a given (scenario, seed).
inline ScenarioResult run_scenario(const Scenario& scenario) {
  validate_scenario(scenario);
  Eigen::Index p_max = 0;
  bool any_unknown = false;
  for (const auto& candidate : scenario.candidates) {
    p_max = std::max(p_max, candidate.p);
    any_unknown |= std::holds_alternative<UnknownVariance>(candidate.variance);
  }
  if (scenario.run.mode == SelectionMode::prequential &&
      scenario.run.n_grid.front() <= p_max + (any_unknown ? 2 : 0)) {
    throw insufficient_data_error(
        "run_scenario: first checkpoint must exceed p_max (+2 with unknown "
        "variance)");
  }

  ScenarioResult result;
  result.n_grid = scenario.run.n_grid;
  result.correct_index = correct_candidate_index(scenario);
  for (const auto& candidate : scenario.candidates) {
    result.model_ids.push_back(candidate.id);
  }

  const std::size_t replications =
      static_cast<std::size_t>(scenario.run.replications);
  result.cells.resize(replications);
  parallel_for_index(replications, [&](std::size_t rep) {
    result.cells[rep] =
        scenario.run.mode == SelectionMode::prequential
            ? detail::run_replication_prequential(scenario, rep)
            : detail::run_replication_multivariate(scenario, rep);
  });

  const std::size_t checkpoints = scenario.run.n_grid.size();
  const std::size_t models = scenario.candidates.size();
  result.summaries.resize(checkpoints);
  for (std::size_t c = 0; c < checkpoints; ++c) {
    CheckpointSummary& summary = result.summaries[c];
    summary.n = scenario.run.n_grid[c];
    summary.frac_chosen.assign(models, 0.0);
    double gap_sum = 0.0;
    double gap_sq_sum = 0.0;
    std::size_t gap_count = 0;
    std::size_t correct_count = 0;
    for (std::size_t rep = 0; rep < replications; ++rep) {
      const ReplicationCell& cell = result.cells[rep][c];
      if (std::isfinite(cell.gap)) {
        gap_sum += cell.gap;
        gap_sq_sum += cell.gap * cell.gap;
        ++gap_count;
      }
      if (cell.chosen >= 0) {
        summary.frac_chosen[static_cast<std::size_t>(cell.chosen)] +=
            1.0 / static_cast<double>(replications);
        if (cell.chosen == result.correct_index) ++correct_count;
      }
    }
    if (gap_count > 0) {
      const double mean = gap_sum / static_cast<double>(gap_count);
      summary.mean_gap = mean;
      if (gap_count > 1) {
        const double variance =
            std::max(0.0, (gap_sq_sum - gap_sum * mean) /
                              static_cast<double>(gap_count - 1));
        summary.stderr_gap =
            std::sqrt(variance / static_cast<double>(gap_count));
      } else {
        summary.stderr_gap = 0.0;
      }
    }
    if (result.correct_index >= 0) {
      summary.frac_correct = static_cast<double>(correct_count) /
                             static_cast<double>(replications);
    }
  }
  return result;
}

enum class RateRegressor { log_n, n };

/// Least-squares fit of per-checkpoint mean gaps against log n or n,
/// summarising an empirical divergence rate.
struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  RateRegressor regressor = RateRegressor::log_n;
};

inline RateEstimate estimate_rate(
    const std::vector<std::pair<double, double>>& points,
    RateRegressor regressor) {
  if (points.size() < 4) {
    throw std::invalid_argument("estimate_rate: need at least 4 checkpoints");
  }
  const double count = static_cast<double>(points.size());
  double u_mean = 0.0;
  double g_mean = 0.0;
  for (const auto& [n, gap] : points) {
    u_mean += regressor == RateRegressor::log_n ? std::log(n) : n;
    g_mean += gap;
  }
  u_mean /= count;
  g_mean /= count;
  double s_uu = 0.0;
  double s_ug = 0.0;
  double s_gg = 0.0;
  for (const auto& [n, gap] : points) {
    const double u =
        (regressor == RateRegressor::log_n ? std::log(n) : n) - u_mean;
    const double g = gap - g_mean;
    s_uu += u * u;
    s_ug += u * g;
    s_gg += g * g;
  }
  if (s_uu <= 0.0) {
    throw std::invalid_argument("estimate_rate: degenerate regressor grid");
  }
  RateEstimate estimate;
  estimate.regressor = regressor;
  estimate.slope = s_ug / s_uu;
  estimate.intercept = g_mean - estimate.slope * u_mean;
  const double ss_res = s_gg - estimate.slope * s_ug;
  estimate.r_squared =
      s_gg > 0.0 ? std::min(1.0, std::max(0.0, 1.0 - ss_res / s_gg)) : 1.0;
  return estimate;
}

/// Mean-gap curve across checkpoints together with its fitted rate.
struct GapPoint {
  Eigen::Index n = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

struct GapStudy {
  std::vector<GapPoint> curve;
  RateEstimate rate;
};

namespace detail {

// Slope fits skip checkpoints below this to dodge small-n transients; the
// asymptotic claims under test only concern the large-n regime.
constexpr double kRateFitMinN = 100.0;

inline RateEstimate fit_gap_curve(const std::vector<GapPoint>& curve,
                                  RateRegressor regressor) {
  std::vector<std::pair<double, double>> points;
  for (const auto& point : curve) {
    if (static_cast<double>(point.n) >= kRateFitMinN) {
      points.emplace_back(static_cast<double>(point.n), point.mean);
    }
  }
  return estimate_rate(points, regressor);
}

template <typename PerStepGap>
inline GapStudy accumulate_gap_study(const Scenario& scenario,
                                     Eigen::Index model_p,
                                     PerStepGap per_step,
                                     RateRegressor regressor) {
  const std::size_t replications =
      static_cast<std::size_t>(scenario.run.replications);
  const std::size_t checkpoints = scenario.run.n_grid.size();
  std::vector<std::vector<double>> gaps(replications);

  parallel_for_index(replications, [&](std::size_t rep) {
    const GeneratedData data = generate_data(scenario, rep);
    const LinearModelSpec model(data.design.leftCols(model_p),
                                scenario.candidates.front().variance);
    RlsState state = rls_init(
        model, data.y.head(model_p));
    double gap = 0.0;
    std::vector<double> row(checkpoints,
                            std::numeric_limits<double>::quiet_NaN());
    std::size_t checkpoint = 0;
    while (checkpoint < checkpoints &&
           scenario.run.n_grid[checkpoint] <= model_p) {
      row[checkpoint++] = gap;
    }
    for (Eigen::Index i = model_p; i < data.y.size(); ++i) {
      auto [next_state, step] = rls_update(state, model.row(i), data.y(i));
      state = std::move(next_state);
      gap += per_step(step, state);
      if (checkpoint < checkpoints &&
          i + 1 == scenario.run.n_grid[checkpoint]) {
        row[checkpoint++] = gap;
      }
    }
    gaps[rep] = std::move(row);
  });

  GapStudy study;
  study.curve.resize(checkpoints);
  for (std::size_t c = 0; c < checkpoints; ++c) {
    double sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t rep = 0; rep < replications; ++rep) {
      sum += gaps[rep][c];
      sq_sum += gaps[rep][c] * gaps[rep][c];
    }
    const double count = static_cast<double>(replications);
    const double mean = sum / count;
    study.curve[c].n = scenario.run.n_grid[c];
    study.curve[c].mean = mean;
    study.curve[c].stderr_mean =
        replications > 1
            ? std::sqrt(std::max(0.0, (sq_sum - sum * mean) / (count - 1.0)) /
                        count)
            : 0.0;
  }
  study.rate = fit_gap_curve(study.curve, regressor);
  return study;
}

}  // namespace detail

/// Per-checkpoint mean of S* - S_H for the first candidate (known variance),
/// fitted against log n; the expected slope is p / sigma^2. The difference
/// is accumulated through the identity S* - S_H = sum (1/k_i^2 - 1) T_i /
/// sigma^2, which is exactly zero term by term when p = 0.
inline GapStudy prequential_vs_multivariate_gap(const Scenario& scenario) {
  validate_scenario(scenario);
  for (const auto& candidate : scenario.candidates) {
    if (std::holds_alternative<UnknownVariance>(candidate.variance)) {
      throw std::invalid_argument(
          "prequential_vs_multivariate_gap: candidates must have known "
          "variance");
    }
  }
  const double sigma_sq =
      std::get<KnownVariance>(scenario.candidates.front().variance).value;
  const Eigen::Index model_p = scenario.candidates.front().p;
  return detail::accumulate_gap_study(
      scenario, model_p,
      [sigma_sq](const PredictiveStep& step, const RlsState&) {
        const double z_sq = step.scaled_residual * step.scaled_residual;
        const double t = z_sq / sigma_sq - 2.0;
        return (1.0 / step.variance_inflation - 1.0) * t / sigma_sq;
      },
      RateRegressor::log_n);
}

/// Per-checkpoint mean of S*_unknown - S*_known for the first candidate's
/// dimension, scoring the same recursion both ways (the known score uses the
/// true sigma^2). Expected slope against log n: 2 / sigma^2.
inline GapStudy unknown_vs_known_gap(const Scenario& scenario) {
  validate_scenario(scenario);
  const double sigma_sq = scenario.truth.sigma_sq;
  const Eigen::Index model_p = scenario.candidates.front().p;
  return detail::accumulate_gap_study(
      scenario, model_p,
      [sigma_sq](const PredictiveStep& step, const RlsState& state) {
        return incremental_score_unknown_variance(step, state).value -
               incremental_score_known_variance(step, sigma_sq).value;
      },
      RateRegressor::log_n);
}

/// Fraction of replications in which the multivariate (AIC-equivalent)
/// criterion picks the superfluous location model M2 over the true M1 when
/// the data are i.i.d. N(0, 1). Converges to P(chi^2_1 > 2) ~ 0.1573
/// instead of zero: the multivariate score is not consistent.
inline double aic_inconsistency_probability(Eigen::Index n, int replications,
                                            std::uint64_t seed) {
  if (replications < 1000) {
    throw std::invalid_argument(
        "aic_inconsistency_probability: need at least 1000 replications");
  }
  if (n < 2) {
    throw std::invalid_argument("aic_inconsistency_probability: need n >= 2");
  }
  std::vector<std::uint8_t> picked_complex(
      static_cast<std::size_t>(replications), 0);
  parallel_for_index(static_cast<std::size_t>(replications),
                     [&](std::size_t rep) {
                       CounterRng noise(seed, rep, /*stream=*/1);
                       Eigen::VectorXd y(n);
                       for (Eigen::Index i = 0; i < n; ++i) {
                         y(i) = noise.next_normal();
                       }
                       const std::vector<Candidate> candidates = {
                           {"M1", LinearModelSpec(Eigen::MatrixXd(n, 0),
                                                  KnownVariance{1.0})},
                           {"M2", LinearModelSpec(Eigen::MatrixXd::Ones(n, 1),
                                                  KnownVariance{1.0})}};
                       const SelectionResult result =
                           select_multivariate(y, candidates);
                       picked_complex[rep] = result.chosen_index == 1;
                     });
  std::size_t count = 0;
  for (const auto flag : picked_complex) count += flag;
  return static_cast<double>(count) / static_cast<double>(replications);
}

/// Same experiment for the unknown-variance criterion (minimising
/// J = sigmahat^2 / (nu - 4) through the multivariate score). Same
/// non-vanishing limit ~ 0.1573.
inline double j_criterion_inconsistency_probability(Eigen::Index n,
                                                    int replications,
                                                    std::uint64_t seed) {
  if (replications < 1000) {
    throw std::invalid_argument(
        "j_criterion_inconsistency_probability: need at least 1000 "
        "replications");
  }
  if (n < 7) {
    throw std::invalid_argument(
        "j_criterion_inconsistency_probability: need n >= 7 so both models "
        "have nu > 4");
  }
  std::vector<std::uint8_t> picked_complex(
      static_cast<std::size_t>(replications), 0);
  parallel_for_index(static_cast<std::size_t>(replications),
                     [&](std::size_t rep) {
                       CounterRng noise(seed, rep, /*stream=*/1);
                       Eigen::VectorXd y(n);
                       for (Eigen::Index i = 0; i < n; ++i) {
                         y(i) = noise.next_normal();
                       }
                       const std::vector<Candidate> candidates = {
                           {"M1", LinearModelSpec(Eigen::MatrixXd(n, 0),
                                                  UnknownVariance{})},
                           {"M2", LinearModelSpec(Eigen::MatrixXd::Ones(n, 1),
                                                  UnknownVariance{})}};
                       const SelectionResult result =
                           select_multivariate(y, candidates);
                       picked_complex[rep] = result.chosen_index == 1;
                     });
  std::size_t count = 0;
  for (const auto flag : picked_complex) count += flag;
  return static_cast<double>(count) / static_cast<double>(replications);
}

}  // namespace preqsel
