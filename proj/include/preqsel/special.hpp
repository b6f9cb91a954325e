// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace preqsel {

namespace detail {

// Series expansion of the regularized lower incomplete gamma P(a, x),
// effective for x < a + 1.
inline double gamma_p_series(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * eps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("gamma_p_series: no convergence");
}

// Continued fraction (modified Lentz) for the regularized upper incomplete
// gamma Q(a, x), effective for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("gamma_q_continued_fraction: no convergence");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("regularized_gamma_p: require a > 0, x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("regularized_gamma_q: require a > 0, x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

/// Survival function of the chi-squared distribution with `dof` degrees of
/// freedom: P(X > x).
inline double chi_squared_sf(double x, double dof) {
  if (!(dof > 0.0)) {
    throw std::invalid_argument("chi_squared_sf: dof must be positive");
  }
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace preqsel
