// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>

#include "preqsel/rng.hpp"

namespace preqsel::test {

inline Eigen::VectorXd random_vector(CounterRng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_normal();
  return v;
}

// Standard-normal design; full column rank with probability one.
inline Eigen::MatrixXd random_design(CounterRng& rng, Eigen::Index n,
                                     Eigen::Index p) {
  Eigen::MatrixXd design(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) design(i, j) = rng.next_normal();
  }
  return design;
}

// As above, but redrawn until the leading p x p block is decently
// conditioned. The algebraic identity tests assume the exact-fit
// initialisation does not wash out double precision; a near-singular
// leading block amplifies rounding by its squared condition number.
inline Eigen::MatrixXd random_design_conditioned(CounterRng& rng,
                                                 Eigen::Index n,
                                                 Eigen::Index p) {
  for (;;) {
    Eigen::MatrixXd design = random_design(rng, n, p);
    if (p == 0) return design;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.topRows(p));
    const auto& sigma = svd.singularValues();
    if (sigma(sigma.size() - 1) > 0.05 * sigma(0) &&
        sigma(sigma.size() - 1) > 0.3) {
      return design;
    }
  }
}

inline double relative_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
  return std::abs(a - b) / scale;
}

}  // namespace preqsel::test
