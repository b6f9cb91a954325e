// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "preqsel/scoring.hpp"

namespace preqsel {

/// Multivariate normal given by mean and a symmetric positive semi-definite
/// precision matrix. Singular precision is permitted: it encodes an improper
/// marginal (flat in some directions), which homogeneous scores handle fine.
class GaussianSpec {
 public:
  GaussianSpec(Eigen::VectorXd mean, Eigen::MatrixXd precision)
      : mean_(std::move(mean)), precision_(std::move(precision)) {
    if (precision_.rows() != precision_.cols()) {
      throw std::invalid_argument("GaussianSpec: precision must be square");
    }
    if (mean_.size() != precision_.rows()) {
      throw std::invalid_argument(
          "GaussianSpec: mean and precision dimensions disagree");
    }
    if (!mean_.allFinite() || !precision_.allFinite()) {
      throw std::invalid_argument("GaussianSpec: non-finite entries");
    }
    const double scale = precision_.cwiseAbs().maxCoeff();
    const double asymmetry =
        (precision_ - precision_.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-12 * scale) {
      throw std::invalid_argument("GaussianSpec: precision is not symmetric");
    }
    if (precision_.size() > 0 && scale > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(
          precision_, Eigen::EigenvaluesOnly);
      const double floor = -1e-10 * precision_.norm();
      if (eigen.eigenvalues().minCoeff() < floor) {
        throw std::invalid_argument(
            "GaussianSpec: precision is not positive semi-definite");
      }
    }
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
};

/// Univariate normal with strictly positive variance.
struct UniGaussianSpec {
  double mean = 0.0;
  double variance = 1.0;

  UniGaussianSpec(double mean_in, double variance_in)
      : mean(mean_in), variance(variance_in) {
    if (!(variance > 0.0) || !std::isfinite(variance) ||
        !std::isfinite(mean)) {
      throw std::invalid_argument(
          "UniGaussianSpec: variance must be positive and finite");
    }
  }
};

/// Hyvarinen score of a multivariate normal at x:
/// ||Phi (x - mu)||^2 - 2 tr(Phi). Valid for singular Phi.
inline ScoreValue hyvarinen_score(const Eigen::VectorXd& x,
                                  const GaussianSpec& q) {
  if (x.size() != q.dim()) {
    throw std::invalid_argument("hyvarinen_score: dimension mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("hyvarinen_score: non-finite observation");
  }
  const Eigen::VectorXd scaled = q.precision() * (x - q.mean());
  return {scaled.squaredNorm() - 2.0 * q.precision().trace()};
}

/// Hyvarinen discrepancy between multivariate normals:
/// tr(Phi_P - 2 Phi_Q + Phi_P^{-1} Phi_Q^2) + ||Phi_Q (mu_P - mu_Q)||^2.
/// Requires strictly positive-definite Phi_P (its inverse is needed);
/// Phi_Q may be singular.
inline double hyvarinen_discrepancy(const GaussianSpec& p,
                                    const GaussianSpec& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("hyvarinen_discrepancy: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(p.precision());
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "hyvarinen_discrepancy: P precision must be strictly positive "
        "definite");
  }
  const Eigen::MatrixXd precision_q_sq = q.precision() * q.precision();
  const Eigen::MatrixXd p_inverse_q_sq = llt.solve(precision_q_sq);
  const double trace_term = p.precision().trace() -
                            2.0 * q.precision().trace() +
                            p_inverse_q_sq.trace();
  const Eigen::VectorXd mean_term = q.precision() * (p.mean() - q.mean());
  return trace_term + mean_term.squaredNorm();
}

/// Univariate Hyvarinen score {(x - mu)^2 - 2 sigma^2} / sigma^4.
inline ScoreValue hyvarinen_score(double x, const UniGaussianSpec& q) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("hyvarinen_score: non-finite observation");
  }
  const double centered = x - q.mean;
  return {(centered * centered - 2.0 * q.variance) /
          (q.variance * q.variance)};
}

/// Univariate Hyvarinen discrepancy
/// (1/sigma_Q^4) { (sigma_P^2 - sigma_Q^2)^2 / sigma_P^2 + (mu_P - mu_Q)^2 }.
inline double hyvarinen_discrepancy(const UniGaussianSpec& p,
                                    const UniGaussianSpec& q) {
  const double variance_gap = p.variance - q.variance;
  const double mean_gap = p.mean - q.mean;
  return (variance_gap * variance_gap / p.variance + mean_gap * mean_gap) /
         (q.variance * q.variance);
}

/// Kullback-Leibler divergence KL(P, Q) between univariate normals. Note the
/// Hyvarinen discrepancy dominates it: D_H(P,Q) >= (2 / sigma_Q^2) KL(P,Q).
inline double kl_divergence(const UniGaussianSpec& p,
                            const UniGaussianSpec& q) {
  const double ratio = p.variance / q.variance;
  const double mean_gap = p.mean - q.mean;
  return 0.5 * (ratio - std::log(ratio) + mean_gap * mean_gap / q.variance -
                1.0);
}

}  // namespace preqsel
