// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "preqsel/scoring.hpp"

namespace preqsel {

/// Finite weighted-particle approximation of a posterior over the model
/// parameter. Each particle carries, per observation coordinate, the first
/// and second derivatives of log p(x | theta) at the observed x. Grids and
/// Monte Carlo samples both fit this representation.
struct PosteriorParticle {
  double weight = 0.0;
  Eigen::VectorXd d1;  // d/dx_i log p(x | theta)
  Eigen::VectorXd d2;  // d^2/dx_i^2 log p(x | theta)
};

class ParticlePosterior {
 public:
  explicit ParticlePosterior(std::vector<PosteriorParticle> particles)
      : particles_(std::move(particles)) {
    if (particles_.empty()) {
      throw std::invalid_argument("ParticlePosterior: empty particle list");
    }
    const Eigen::Index dim = particles_.front().d1.size();
    double total_weight = 0.0;
    for (const auto& particle : particles_) {
      if (particle.d1.size() != dim || particle.d2.size() != dim) {
        throw std::invalid_argument(
            "ParticlePosterior: inconsistent particle dimensions");
      }
      if (!particle.d1.allFinite() || !particle.d2.allFinite() ||
          !std::isfinite(particle.weight) || particle.weight < 0.0) {
        throw std::invalid_argument(
            "ParticlePosterior: non-finite or negative particle");
      }
      total_weight += particle.weight;
    }
    if (std::abs(total_weight - 1.0) > 1e-10) {
      throw std::invalid_argument(
          "ParticlePosterior: weights must sum to one");
    }
  }

  const std::vector<PosteriorParticle>& particles() const {
    return particles_;
  }
  Eigen::Index dim() const { return particles_.front().d1.size(); }

 private:
  std::vector<PosteriorParticle> particles_;
};

/// Hyvarinen score of the posterior-mixture predictive, raw-moment form:
/// sum_i ( E[2 d2_i + 2 d1_i^2] - (E d1_i)^2 ) under the particle weights.
inline ScoreValue mixture_hyvarinen_score(const ParticlePosterior& post) {
  const Eigen::Index dim = post.dim();
  Eigen::VectorXd mean_d1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(dim);
  for (const auto& particle : post.particles()) {
    mean_d1 += particle.weight * particle.d1;
    raw += particle.weight *
           (2.0 * particle.d2 + 2.0 * particle.d1.cwiseProduct(particle.d1));
  }
  return {(raw - mean_d1.cwiseProduct(mean_d1)).sum()};
}

/// The same score in its decomposed form: posterior mean of the per-theta
/// Hyvarinen scores plus the posterior variance of each coordinate of the
/// log-density gradient. Agrees with the raw-moment form up to summation
/// order; the variance term makes the mixture score exceed the mean score.
inline ScoreValue mixture_hyvarinen_score_decomposed(
    const ParticlePosterior& post) {
  const Eigen::Index dim = post.dim();
  double mean_score = 0.0;
  Eigen::VectorXd mean_d1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mean_d1_sq = Eigen::VectorXd::Zero(dim);
  for (const auto& particle : post.particles()) {
    const LogDensityDerivatives derivatives{particle.d1, particle.d2.sum()};
    mean_score += particle.weight * hyvarinen_score(derivatives).value;
    mean_d1 += particle.weight * particle.d1;
    mean_d1_sq += particle.weight * particle.d1.cwiseProduct(particle.d1);
  }
  const double gradient_variance =
      (mean_d1_sq - mean_d1.cwiseProduct(mean_d1)).sum();
  return {mean_score + gradient_variance};
}

/// Evaluated pieces of an exponential-family model
/// log p(x | theta) = a(x) + b(theta) + sum_j theta_j t_j(x)
/// at the observed x, together with the posterior mean and dispersion of
/// theta given x. b(theta) never appears: homogeneity makes it irrelevant,
/// and the interface has no slot for it.
struct ExpFamilyEval {
  Eigen::VectorXd grad_a;      // length k = dim(x)
  double lap_a = 0.0;
  Eigen::VectorXd t_laplacians;  // length p, entry j = Laplacian of t_j
  Eigen::MatrixXd t_jacobian;    // k x p, (i, j) = d t_j / d x_i
  Eigen::VectorXd theta_mean;    // posterior mean, length p
  Eigen::MatrixXd theta_dispersion;  // posterior covariance, p x p
};

/// Closed-form mixture score for an exponential family:
/// 2 lap_a + 2 d^T mu + ||grad_a + J mu||^2 + 2 tr(J Sigma J^T).
inline ScoreValue expfam_hyvarinen_score(const ExpFamilyEval& eval) {
  const Eigen::Index k = eval.grad_a.size();
  const Eigen::Index p = eval.theta_mean.size();
  if (eval.t_jacobian.rows() != k || eval.t_jacobian.cols() != p ||
      eval.t_laplacians.size() != p || eval.theta_dispersion.rows() != p ||
      eval.theta_dispersion.cols() != p) {
    throw std::invalid_argument("expfam_hyvarinen_score: dimension mismatch");
  }
  if (!eval.grad_a.allFinite() || !std::isfinite(eval.lap_a) ||
      !eval.t_laplacians.allFinite() || !eval.t_jacobian.allFinite() ||
      !eval.theta_mean.allFinite() || !eval.theta_dispersion.allFinite()) {
    throw std::invalid_argument("expfam_hyvarinen_score: non-finite input");
  }
  const Eigen::VectorXd mean_gradient =
      eval.grad_a + eval.t_jacobian * eval.theta_mean;
  const Eigen::MatrixXd propagated =
      eval.t_jacobian * eval.theta_dispersion * eval.t_jacobian.transpose();
  return {2.0 * eval.lap_a + 2.0 * eval.t_laplacians.dot(eval.theta_mean) +
          mean_gradient.squaredNorm() + 2.0 * propagated.trace()};
}

}  // namespace preqsel
