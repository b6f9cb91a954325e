// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>

#include "preqsel/errors.hpp"
#include "preqsel/gaussian.hpp"
#include "preqsel/scoring.hpp"

namespace preqsel {

struct KnownVariance {
  double value = 1.0;  // sigma^2
  bool operator==(const KnownVariance&) const = default;
};
struct UnknownVariance {
  bool operator==(const UnknownVariance&) const = default;
};
using VarianceSpec = std::variant<KnownVariance, UnknownVariance>;

/// Normal linear model Y ~ N(X theta, sigma^2 I) with the design held by
/// value. X must have full column rank (singular values > 1e-10 times the
/// largest); p = 0 designs (no parameters) are first-class.
class LinearModelSpec {
 public:
  LinearModelSpec(Eigen::MatrixXd design, VarianceSpec variance)
      : design_(std::move(design)), variance_(variance) {
    if (!design_.allFinite()) {
      throw std::invalid_argument("LinearModelSpec: non-finite design");
    }
    if (const auto* known = std::get_if<KnownVariance>(&variance_)) {
      if (!(known->value > 0.0) || !std::isfinite(known->value)) {
        throw std::invalid_argument(
            "LinearModelSpec: known variance must be positive");
      }
    }
    if (design_.cols() > 0) {
      if (design_.rows() < design_.cols()) {
        throw rank_deficient_error(
            "LinearModelSpec: fewer rows than columns, rank(X) < p");
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(design_);
      const auto& sigma = svd.singularValues();
      if (sigma(sigma.size() - 1) <= 1e-10 * sigma(0)) {
        throw rank_deficient_error(
            "LinearModelSpec: design does not have full column rank");
      }
    }
  }

  Eigen::Index n() const { return design_.rows(); }
  Eigen::Index p() const { return design_.cols(); }
  const Eigen::MatrixXd& design() const { return design_; }
  Eigen::VectorXd row(Eigen::Index i) const {
    return design_.row(i).transpose();
  }
  const VarianceSpec& variance() const { return variance_; }
  bool has_known_variance() const {
    return std::holds_alternative<KnownVariance>(variance_);
  }
  double known_variance() const {
    return std::get<KnownVariance>(variance_).value;
  }

 private:
  Eigen::MatrixXd design_;
  VarianceSpec variance_;
};

struct ImproperFlatPrior {};

struct ProperNormalPrior {
  Eigen::VectorXd mean;        // m
  Eigen::MatrixXd covariance;  // V, symmetric positive definite

  ProperNormalPrior(Eigen::VectorXd mean_in, Eigen::MatrixXd covariance_in)
      : mean(std::move(mean_in)), covariance(std::move(covariance_in)) {
    if (covariance.rows() != covariance.cols() ||
        covariance.rows() != mean.size()) {
      throw std::invalid_argument("ProperNormalPrior: dimension mismatch");
    }
    if (covariance.size() > 0) {
      const double scale = covariance.cwiseAbs().maxCoeff();
      if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * scale) {
        throw std::invalid_argument("ProperNormalPrior: V is not symmetric");
      }
      if (Eigen::LLT<Eigen::MatrixXd>(covariance).info() != Eigen::Success) {
        throw std::invalid_argument(
            "ProperNormalPrior: V is not positive definite");
      }
    }
  }
};

using PriorSpec = std::variant<ImproperFlatPrior, ProperNormalPrior>;

namespace detail {

inline double residual_sum_of_squares(const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& design) {
  if (design.cols() == 0) return y.squaredNorm();
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd coefficients =
      Eigen::LLT<Eigen::MatrixXd>(gram).solve(design.transpose() * y);
  return (y - design * coefficients).squaredNorm();
}

}  // namespace detail

/// Precision-matrix form of the marginal distribution of Y under a normal
/// prior on theta (known sigma^2). The improper flat prior is the
/// V^{-1} -> 0 limit: precision sigma^{-2} (I - X A X^T) with A = (X^T X)^{-1},
/// the projection onto the residual space, of rank n - p. The returned
/// precision is singular in that case, which GaussianSpec permits.
inline GaussianSpec marginal_precision(const LinearModelSpec& model,
                                       const PriorSpec& prior) {
  if (!model.has_known_variance()) {
    throw std::invalid_argument(
        "marginal_precision: model must have known variance");
  }
  const double sigma_sq = model.known_variance();
  const Eigen::Index n = model.n();
  const Eigen::Index p = model.p();
  const Eigen::MatrixXd& design = model.design();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

  if (const auto* proper = std::get_if<ProperNormalPrior>(&prior)) {
    if (proper->mean.size() != p) {
      throw std::invalid_argument(
          "marginal_precision: prior dimension does not match design");
    }
    Eigen::MatrixXd precision;
    if (p == 0) {
      precision = identity / sigma_sq;
    } else {
      const Eigen::MatrixXd v_inverse =
          Eigen::LLT<Eigen::MatrixXd>(proper->covariance)
              .solve(Eigen::MatrixXd::Identity(p, p));
      const Eigen::MatrixXd core =
          design.transpose() * design + sigma_sq * v_inverse;
      const Eigen::MatrixXd middle =
          Eigen::LLT<Eigen::MatrixXd>(core).solve(design.transpose());
      precision = (identity - design * middle) / sigma_sq;
    }
    precision = 0.5 * (precision + precision.transpose());
    return GaussianSpec(design * proper->mean, std::move(precision));
  }

  Eigen::MatrixXd projection;
  if (p == 0) {
    projection = identity;
  } else {
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::MatrixXd gram_inverse =
        Eigen::LLT<Eigen::MatrixXd>(gram).solve(
            Eigen::MatrixXd::Identity(p, p));
    projection = identity - design * gram_inverse * design.transpose();
    projection = 0.5 * (projection + projection.transpose());
  }
  return GaussianSpec(Eigen::VectorXd::Zero(n), projection / sigma_sq);
}

/// Hyvarinen score of the model's improper-prior marginal for the full data
/// vector. Known variance: (rss - 2 nu sigma^2) / sigma^4, identical to the
/// generic multivariate score at the singular marginal precision. Unknown
/// variance (prior pi(theta, phi) ~ 1/phi): -(nu - 4) / sigmahat^2 with
/// sigmahat^2 = rss / nu.
inline ScoreValue multivariate_score(const Eigen::VectorXd& y,
                                     const LinearModelSpec& model) {
  if (y.size() != model.n()) {
    throw std::invalid_argument(
        "multivariate_score: data length does not match design rows");
  }
  if (!y.allFinite()) {
    throw std::invalid_argument("multivariate_score: non-finite data");
  }
  const double n = static_cast<double>(model.n());
  const double p = static_cast<double>(model.p());
  const double dof = n - p;

  if (model.has_known_variance()) {
    if (dof < 1.0) {
      throw insufficient_data_error(
          "multivariate_score: need n > p for known variance");
    }
    const double sigma_sq = model.known_variance();
    const double rss = detail::residual_sum_of_squares(y, model.design());
    return {(rss - 2.0 * dof * sigma_sq) / (sigma_sq * sigma_sq)};
  }

  if (n < p + 2.0) {
    throw insufficient_data_error(
        "multivariate_score: need n >= p + 2 for unknown variance");
  }
  const double rss = detail::residual_sum_of_squares(y, model.design());
  if (rss <= 1e-14 * y.squaredNorm() || rss <= 0.0) {
    throw degenerate_predictive_error(
        "multivariate_score: zero residual sum of squares");
  }
  const double sigma_hat_sq = rss / dof;
  return {-(dof - 4.0) / sigma_hat_sq};
}

/// Recursive least-squares state after consuming the first `count`
/// observations: gram_inverse = {(X^i)^T X^i}^{-1}, the exact-fit or
/// least-squares coefficients, the residual sum of squares and its degrees
/// of freedom count - p.
struct RlsState {
  Eigen::Index count = 0;        // observations consumed
  Eigen::MatrixXd gram_inverse;  // p x p
  Eigen::VectorXd coefficients;  // p
  double rss = 0.0;
  Eigen::Index residual_dof = 0;  // count - p
};

/// One-step-ahead predictive summary produced by an update: predictive mean,
/// variance inflation k^2 = 1 + x^T A x >= 1, the standardised residual
/// Z = (y - eta) / k, and (once dof >= 1) the residual mean square rss / dof.
struct PredictiveStep {
  double predicted_mean = 0.0;
  double variance_inflation = 1.0;
  double scaled_residual = 0.0;
  std::optional<double> residual_mean_square;
};

/// Starts the recursion at i = p by exactly fitting the first p rows. The
/// rows are used in the order given; a singular leading block is reported
/// rather than silently permuted, so traces stay reproducible.
inline RlsState rls_init(const LinearModelSpec& model,
                         const Eigen::VectorXd& y_head) {
  const Eigen::Index p = model.p();
  if (y_head.size() != p) {
    throw std::invalid_argument("rls_init: y_head must have length p");
  }
  RlsState state;
  state.count = p;
  state.residual_dof = 0;
  state.rss = 0.0;
  if (p == 0) {
    state.gram_inverse.resize(0, 0);
    state.coefficients.resize(0);
    return state;
  }
  const Eigen::MatrixXd block = model.design().topRows(p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
  if (!lu.isInvertible()) {
    throw row_ordering_error(
        "rls_init: leading p x p design block is singular; permute the rows "
        "so the first p are linearly independent");
  }
  const Eigen::MatrixXd block_inverse =
      lu.inverse();
  state.gram_inverse = block_inverse * block_inverse.transpose();
  state.gram_inverse =
      0.5 * (state.gram_inverse + state.gram_inverse.transpose());
  state.coefficients = lu.solve(y_head);
  return state;
}

/// Advances the recursion by one observation via the rank-one Woodbury
/// downdate of gram_inverse. Returns the new state and the predictive step.
inline std::pair<RlsState, PredictiveStep> rls_update(const RlsState& state,
                                                      const Eigen::VectorXd& x,
                                                      double y) {
  if (x.size() != state.gram_inverse.rows()) {
    throw std::invalid_argument("rls_update: row dimension mismatch");
  }
  if (!x.allFinite() || !std::isfinite(y)) {
    throw std::invalid_argument("rls_update: non-finite input");
  }
  RlsState next;
  PredictiveStep step;
  next.count = state.count + 1;
  next.residual_dof = state.residual_dof + 1;

  if (x.size() == 0) {
    step.predicted_mean = 0.0;
    step.variance_inflation = 1.0;
    step.scaled_residual = y;
    next.gram_inverse = state.gram_inverse;
    next.coefficients = state.coefficients;
  } else {
    step.predicted_mean = x.dot(state.coefficients);
    const Eigen::VectorXd projected = state.gram_inverse * x;
    step.variance_inflation = 1.0 + x.dot(projected);
    if (step.variance_inflation < 1.0 - 1e-10) {
      throw std::runtime_error(
          "rls_update: variance inflation fell below one; state corrupted");
    }
    const double innovation = y - step.predicted_mean;
    step.scaled_residual = innovation / std::sqrt(step.variance_inflation);
    next.gram_inverse =
        state.gram_inverse -
        (projected * projected.transpose()) / step.variance_inflation;
    next.gram_inverse =
        0.5 * (next.gram_inverse + next.gram_inverse.transpose());
    next.coefficients =
        state.coefficients + next.gram_inverse * x * innovation;
  }
  next.rss = state.rss + step.scaled_residual * step.scaled_residual;
  if (next.residual_dof >= 1) {
    step.residual_mean_square =
        next.rss / static_cast<double>(next.residual_dof);
  }
  return {std::move(next), step};
}

/// Incremental Hyvarinen score of the known-variance predictive
/// Y_i ~ N(eta_i, k_i^2 sigma^2): (Z^2 / sigma^2 - 2) / (k^2 sigma^2).
inline ScoreValue incremental_score_known_variance(const PredictiveStep& step,
                                                   double sigma_sq) {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw std::invalid_argument(
        "incremental_score_known_variance: variance must be positive");
  }
  const double z_sq = step.scaled_residual * step.scaled_residual;
  return {(z_sq / sigma_sq - 2.0) / (step.variance_inflation * sigma_sq)};
}

/// Incremental Hyvarinen score of the unknown-variance (Student-type)
/// predictive: {(1 + 4/nu) Z^2 - 2 s^2} / (k^2 s^4) with s^2 = rss / nu
/// taken from the state after the update.
inline ScoreValue incremental_score_unknown_variance(
    const PredictiveStep& step, const RlsState& state_after) {
  if (state_after.residual_dof < 1) {
    throw insufficient_data_error(
        "incremental_score_unknown_variance: needs at least one residual "
        "degree of freedom");
  }
  if (!(state_after.rss > 0.0)) {
    throw degenerate_predictive_error(
        "incremental_score_unknown_variance: zero residual sum of squares");
  }
  const double dof = static_cast<double>(state_after.residual_dof);
  const double s_sq = state_after.rss / dof;
  const double z_sq = step.scaled_residual * step.scaled_residual;
  return {((1.0 + 4.0 / dof) * z_sq - 2.0 * s_sq) /
          (step.variance_inflation * s_sq * s_sq)};
}

/// Algebraically equivalent form nu {(4 + nu) Z^2 - 2 rss} / (k^2 rss^2),
/// kept as an independent route for cross-checking the score above.
inline ScoreValue incremental_score_unknown_variance_rss_form(
    const PredictiveStep& step, const RlsState& state_after) {
  if (state_after.residual_dof < 1) {
    throw insufficient_data_error(
        "incremental_score_unknown_variance_rss_form: needs at least one "
        "residual degree of freedom");
  }
  if (!(state_after.rss > 0.0)) {
    throw degenerate_predictive_error(
        "incremental_score_unknown_variance_rss_form: zero residual sum of "
        "squares");
  }
  const double dof = static_cast<double>(state_after.residual_dof);
  const double rss = state_after.rss;
  const double z_sq = step.scaled_residual * step.scaled_residual;
  return {dof * ((4.0 + dof) * z_sq - 2.0 * rss) /
          (step.variance_inflation * rss * rss)};
}

}  // namespace preqsel
