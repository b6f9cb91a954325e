// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace preqsel {

/// Derivatives of log q at the observed point, supplied by the caller.
///
/// The scoring rules in this library are homogeneous: they depend on the
/// density only through the gradient and Laplacian of its logarithm, so the
/// interface never accepts a raw density value and normalising constants
/// cannot enter by construction. Improper (non-integrable) densities are
/// scored the same way as proper ones.
struct LogDensityDerivatives {
  Eigen::VectorXd gradient;  // d/dx_i log q(x)
  double laplacian = 0.0;    // sum_i d^2/dx_i^2 log q(x)
};

/// A realised score value. Operations reject non-finite inputs rather than
/// propagating infinities, so a degenerate model specification fails loudly.
struct ScoreValue {
  double value = 0.0;
};

inline void require_finite(const LogDensityDerivatives& d, const char* where) {
  if (!d.gradient.allFinite() || !std::isfinite(d.laplacian)) {
    throw std::invalid_argument(std::string(where) +
                                ": non-finite log-density derivatives");
  }
}

/// Hyvarinen score 2 * laplacian(log q) + ||grad(log q)||^2.
inline ScoreValue hyvarinen_score(const LogDensityDerivatives& d) {
  require_finite(d, "hyvarinen_score");
  return {2.0 * d.laplacian + d.gradient.squaredNorm()};
}

/// Logarithmic score -log q(x).
inline ScoreValue log_score(double log_q_at_x) {
  if (!std::isfinite(log_q_at_x)) {
    throw std::invalid_argument("log_score: non-finite log density");
  }
  return {-log_q_at_x};
}

/// Self-test that scaling the density by c > 0 cannot change the score.
///
/// Multiplying q by c shifts log q by the constant log c and leaves its
/// derivatives untouched, so the score recomputed from the derivatives of
/// c*q must equal the original bit for bit. Always true by construction;
/// asserts that the implementation consumes derivatives, never densities.
inline bool homogeneity_check(const LogDensityDerivatives& d, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("homogeneity_check: scale must be positive");
  }
  const double original = hyvarinen_score(d).value;
  const LogDensityDerivatives scaled_density_derivatives = d;
  return hyvarinen_score(scaled_density_derivatives).value == original;
}

}  // namespace preqsel
