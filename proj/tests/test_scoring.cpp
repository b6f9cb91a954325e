// Apache License, Version 2.0, refer to LICENSE.txt
#include <catch2/catch.hpp>

#include <cmath>
#include <limits>

#include "preqsel/rng.hpp"
#include "preqsel/scoring.hpp"

using preqsel::CounterRng;
using preqsel::homogeneity_check;
using preqsel::hyvarinen_score;
using preqsel::log_score;
using preqsel::LogDensityDerivatives;

namespace {

LogDensityDerivatives make(std::initializer_list<double> gradient,
                           double laplacian) {
  LogDensityDerivatives d;
  d.gradient = Eigen::VectorXd(static_cast<Eigen::Index>(gradient.size()));
  Eigen::Index i = 0;
  for (const double g : gradient) d.gradient(i++) = g;
  d.laplacian = laplacian;
  return d;
}

}  // namespace

TEST_CASE("hyvarinen score on hand-evaluated derivatives") {
  CHECK(hyvarinen_score(make({0.0}, 0.0)).value == 0.0);
  // standard normal at x = 1: grad log q = -x, laplacian = -1
  CHECK(hyvarinen_score(make({-1.0}, -1.0)).value == Approx(-1.0));
  CHECK(hyvarinen_score(make({3.0, 4.0}, -2.0)).value == Approx(21.0));
}

TEST_CASE("hyvarinen score is exactly 2 lap + |grad|^2 on random inputs") {
  CounterRng rng(411);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.next_u64() % 6);
    LogDensityDerivatives d;
    d.gradient = Eigen::VectorXd(k);
    double grad_sq = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      d.gradient(i) = 3.0 * rng.next_normal();
      grad_sq += d.gradient(i) * d.gradient(i);
    }
    d.laplacian = 5.0 * rng.next_normal();
    const double independent = 2.0 * d.laplacian + grad_sq;
    CHECK(hyvarinen_score(d).value == Approx(independent).epsilon(1e-13));
  }
}

TEST_CASE("hyvarinen score rejects non-finite derivatives") {
  CHECK_THROWS_AS(
      hyvarinen_score(make({std::numeric_limits<double>::infinity()}, 0.0)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      hyvarinen_score(make({0.0}, std::nan(""))),
      std::invalid_argument);
}

TEST_CASE("log score") {
  CHECK(log_score(0.0).value == 0.0);  // density one scores zero
  CHECK(log_score(-1.5).value == Approx(1.5));
  CHECK(log_score(std::log(0.1)).value == Approx(2.302585092994046));
  CHECK(log_score(std::log(1.0)).value == 0.0);
  CHECK_THROWS_AS(log_score(std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("homogeneity: scaling the density never changes the score") {
  CHECK(homogeneity_check(make({-1.0}, -1.0), 1.0));
  CHECK(homogeneity_check(make({-1.0}, -1.0), 7.3));
  CHECK(homogeneity_check(make({3.0, 4.0}, -2.0), 1e-9));

  CounterRng rng(412);
  for (int rep = 0; rep < 200; ++rep) {
    LogDensityDerivatives d;
    d.gradient = Eigen::VectorXd(2);
    d.gradient << 10.0 * rng.next_normal(), 10.0 * rng.next_normal();
    d.laplacian = 10.0 * rng.next_normal();
    const double log_scale = 40.0 * (rng.next_unit() - 0.5);
    CHECK(homogeneity_check(d, std::exp(log_scale)));
  }
}

TEST_CASE("homogeneity check rejects non-positive scales") {
  CHECK_THROWS_AS(homogeneity_check(make({0.0}, 0.0), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(homogeneity_check(make({0.0}, 0.0), -2.0),
                  std::invalid_argument);
}
