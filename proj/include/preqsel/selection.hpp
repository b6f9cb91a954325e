// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "preqsel/errors.hpp"
#include "preqsel/linear_model.hpp"

namespace preqsel {

enum class TraceKind { multivariate, prequential, hybrid };

/// How models of different dimension share an index set. skip_head scores
/// only indices beyond the largest model dimension; hybrid_head additionally
/// credits each model with the multivariate score of the first p_max
/// observations.
enum class Alignment { skip_head, hybrid_head };

struct Candidate {
  std::string id;
  LinearModelSpec model;
};

struct ScoreTrace {
  std::string model_id;
  TraceKind kind = TraceKind::prequential;
  std::vector<std::pair<Eigen::Index, double>> increments;
  std::vector<std::pair<Eigen::Index, double>> cumulative;
  std::optional<double> head_score;
};

struct InfeasibleModel {
  std::string model_id;
  std::string reason;
};

struct SelectionResult {
  std::string chosen;
  int chosen_index = -1;
  std::map<std::string, double> final_scores;
  std::vector<ScoreTrace> traces;
  std::vector<InfeasibleModel> infeasible;
};

/// Index of the smallest score, first-registered wins; differences within
/// 1e-12 relative are treated as exact ties. Adding a common constant to
/// every score leaves the choice unchanged.
inline int select_minimum(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("select_minimum: no scores");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    const double tie_tol =
        1e-12 * std::max(std::abs(scores[i]), std::abs(scores[best]));
    if (scores[i] < scores[best] - tie_tol) best = i;
  }
  return best;
}

namespace detail {

inline int select_minimum_feasible(const std::vector<double>& scores,
                                   const std::vector<bool>& feasible) {
  std::vector<double> present;
  std::vector<int> index_of;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (feasible[i]) {
      present.push_back(scores[i]);
      index_of.push_back(i);
    }
  }
  if (present.empty()) return -1;
  return index_of[static_cast<std::size_t>(select_minimum(present))];
}

}  // namespace detail

/// Streams a shared observation sequence through every candidate's
/// recursion, scoring all of them over the identical index set
/// i = p_max + 1, ..., n. Models that hit a score-level error mid-stream are
/// flagged infeasible and stop accumulating rather than poisoning the run.
class PrequentialScorer {
 public:
  PrequentialScorer(std::vector<Candidate> candidates, Alignment alignment)
      : candidates_(std::move(candidates)), alignment_(alignment) {
    if (candidates_.empty()) {
      throw std::invalid_argument("PrequentialScorer: no candidates");
    }
    const std::size_t count = candidates_.size();
    states_.resize(count);
    head_buffers_.resize(count);
    cumulative_.assign(count, 0.0);
    head_scores_.resize(count);
    feasible_.assign(count, true);
    failure_reasons_.resize(count);
    for (const auto& candidate : candidates_) {
      head_length_ = std::max(head_length_, candidate.model.p());
    }
    for (std::size_t m = 0; m < count; ++m) {
      if (candidates_[m].model.p() == 0) {
        states_[m] = rls_init(candidates_[m].model, Eigen::VectorXd(0));
      }
    }
    if (head_length_ == 0) finish_head();
  }

  Eigen::Index head_length() const { return head_length_; }
  Eigen::Index index() const { return index_; }
  const std::vector<Candidate>& candidates() const { return candidates_; }
  const std::vector<bool>& feasible() const { return feasible_; }
  const std::vector<std::string>& failure_reasons() const {
    return failure_reasons_;
  }
  const std::vector<std::optional<double>>& head_scores() const {
    return head_scores_;
  }

  /// Consumes observation i = index() + 1. Returns per-model incremental
  /// scores (empty while still inside the head block).
  std::vector<double> advance(double y) {
    index_ += 1;
    std::vector<double> increments;
    const bool scoring = index_ > head_length_;
    if (scoring) increments.assign(candidates_.size(), 0.0);

    for (std::size_t m = 0; m < candidates_.size(); ++m) {
      const LinearModelSpec& model = candidates_[m].model;
      if (!states_[m].has_value()) {
        head_buffers_[m].push_back(y);
        if (static_cast<Eigen::Index>(head_buffers_[m].size()) == model.p()) {
          const Eigen::VectorXd head = Eigen::Map<const Eigen::VectorXd>(
              head_buffers_[m].data(), model.p());
          states_[m] = rls_init(model, head);
        }
        continue;
      }
      if (!feasible_[m]) continue;
      auto [next_state, step] =
          rls_update(*states_[m], model.row(index_ - 1), y);
      states_[m] = std::move(next_state);
      if (!scoring) continue;
      try {
        double increment = 0.0;
        if (model.has_known_variance()) {
          increment =
              incremental_score_known_variance(step, model.known_variance())
                  .value;
        } else {
          increment =
              incremental_score_unknown_variance(step, *states_[m]).value;
        }
        cumulative_[m] += increment;
        increments[m] = increment;
      } catch (const std::exception& error) {
        feasible_[m] = false;
        failure_reasons_[m] = error.what();
        if (scoring) increments[m] = std::nan("");
      }
    }
    if (index_ == head_length_) finish_head();
    return increments;
  }

  /// Cumulative incremental score per model (head excluded).
  const std::vector<double>& cumulative() const { return cumulative_; }

  /// Head score plus cumulative increments under the configured alignment.
  std::vector<double> totals() const {
    std::vector<double> result = cumulative_;
    if (alignment_ == Alignment::hybrid_head) {
      for (std::size_t m = 0; m < result.size(); ++m) {
        if (head_scores_[m].has_value()) result[m] += *head_scores_[m];
      }
    }
    return result;
  }

 private:
  // At i = p_max, credit each model with the multivariate score of its head
  // block when hybrid alignment is requested. A model with p = p_max has an
  // empty residual space there and contributes zero.
  void finish_head() {
    if (alignment_ != Alignment::hybrid_head) return;
    for (std::size_t m = 0; m < candidates_.size(); ++m) {
      const LinearModelSpec& model = candidates_[m].model;
      const RlsState& state = *states_[m];
      const double head_dof =
          static_cast<double>(head_length_ - model.p());
      if (model.has_known_variance()) {
        const double sigma_sq = model.known_variance();
        head_scores_[m] =
            (state.rss - 2.0 * head_dof * sigma_sq) / (sigma_sq * sigma_sq);
      } else if (head_dof == 0.0) {
        head_scores_[m] = 0.0;
      } else if (state.rss > 0.0) {
        head_scores_[m] = -(head_dof - 4.0) * head_dof / state.rss;
      } else {
        feasible_[m] = false;
        failure_reasons_[m] =
            "hybrid head: zero residual sum of squares in the head block";
      }
    }
  }

  std::vector<Candidate> candidates_;
  Alignment alignment_;
  Eigen::Index head_length_ = 0;
  Eigen::Index index_ = 0;
  std::vector<std::optional<RlsState>> states_;
  std::vector<std::vector<double>> head_buffers_;
  std::vector<double> cumulative_;
  std::vector<std::optional<double>> head_scores_;
  std::vector<bool> feasible_;
  std::vector<std::string> failure_reasons_;
};

namespace detail {

inline SelectionResult finalize_selection(
    const std::vector<Candidate>& candidates, std::vector<double> scores,
    std::vector<bool> feasible, std::vector<std::string> reasons,
    std::vector<ScoreTrace> traces) {
  SelectionResult result;
  result.traces = std::move(traces);
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    if (feasible[m]) {
      result.final_scores[candidates[m].id] = scores[m];
    } else {
      result.infeasible.push_back({candidates[m].id, reasons[m]});
    }
  }
  result.chosen_index = select_minimum_feasible(scores, feasible);
  if (result.chosen_index < 0) {
    throw std::invalid_argument("selection: no feasible candidate model");
  }
  result.chosen = candidates[static_cast<std::size_t>(result.chosen_index)].id;
  return result;
}

}  // namespace detail

/// Scores every candidate's improper-prior marginal for the whole vector y
/// and picks the minimiser. Candidates violating their score preconditions
/// are excluded with a recorded reason.
inline SelectionResult select_multivariate(
    const Eigen::VectorXd& y, const std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_multivariate: no candidates");
  }
  const std::size_t count = candidates.size();
  std::vector<double> scores(count, std::nan(""));
  std::vector<bool> feasible(count, false);
  std::vector<std::string> reasons(count);
  std::vector<ScoreTrace> traces(count);
  for (std::size_t m = 0; m < count; ++m) {
    traces[m].model_id = candidates[m].id;
    traces[m].kind = TraceKind::multivariate;
    try {
      scores[m] = multivariate_score(y, candidates[m].model).value;
      feasible[m] = true;
      traces[m].cumulative.emplace_back(y.size(), scores[m]);
    } catch (const std::exception& error) {
      reasons[m] = error.what();
    }
  }
  return detail::finalize_selection(candidates, std::move(scores),
                                    std::move(feasible), std::move(reasons),
                                    std::move(traces));
}

/// Runs all candidates prequentially over the shared data vector, scoring
/// the identical index set i > p_max, optionally crediting the hybrid head.
inline SelectionResult select_prequential(
    const Eigen::VectorXd& y, const std::vector<Candidate>& candidates,
    Alignment alignment = Alignment::skip_head) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_prequential: no candidates");
  }
  Eigen::Index p_max = 0;
  bool any_unknown = false;
  for (const auto& candidate : candidates) {
    p_max = std::max(p_max, candidate.model.p());
    any_unknown |= !candidate.model.has_known_variance();
    if (candidate.model.n() < y.size()) {
      throw std::invalid_argument(
          "select_prequential: candidate design has fewer rows than data");
    }
  }
  const Eigen::Index required = p_max + (any_unknown ? 2 : 0);
  if (y.size() <= required) {
    throw insufficient_data_error(
        "select_prequential: need n > p_max (+2 with unknown variance)");
  }

  PrequentialScorer scorer(candidates, alignment);
  const std::size_t count = candidates.size();
  std::vector<ScoreTrace> traces(count);
  const TraceKind kind = alignment == Alignment::hybrid_head
                             ? TraceKind::hybrid
                             : TraceKind::prequential;
  for (std::size_t m = 0; m < count; ++m) {
    traces[m].model_id = candidates[m].id;
    traces[m].kind = kind;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const std::vector<double> increments = scorer.advance(y(i));
    if (increments.empty()) continue;
    const std::vector<double> totals = scorer.totals();
    for (std::size_t m = 0; m < count; ++m) {
      if (!scorer.feasible()[m]) continue;
      traces[m].increments.emplace_back(i + 1, increments[m]);
      traces[m].cumulative.emplace_back(i + 1, totals[m]);
    }
  }
  for (std::size_t m = 0; m < count; ++m) {
    traces[m].head_score = scorer.head_scores()[m];
  }
  return detail::finalize_selection(
      candidates, scorer.totals(),
      scorer.feasible(),
      scorer.failure_reasons(), std::move(traces));
}

/// Pointwise difference of two cumulative traces, a(i) - b(i). Requires the
/// traces to cover the identical index set.
inline std::vector<std::pair<Eigen::Index, double>> trace_gap(
    const ScoreTrace& a, const ScoreTrace& b) {
  if (a.cumulative.size() != b.cumulative.size()) {
    throw std::invalid_argument("trace_gap: index sets differ");
  }
  std::vector<std::pair<Eigen::Index, double>> gap;
  gap.reserve(a.cumulative.size());
  for (std::size_t j = 0; j < a.cumulative.size(); ++j) {
    if (a.cumulative[j].first != b.cumulative[j].first) {
      throw std::invalid_argument("trace_gap: index sets differ");
    }
    gap.emplace_back(a.cumulative[j].first,
                     a.cumulative[j].second - b.cumulative[j].second);
  }
  return gap;
}

}  // namespace preqsel
