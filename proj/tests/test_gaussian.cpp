// Apache License, Version 2.0, refer to LICENSE.txt
#include <catch2/catch.hpp>

#include <cmath>

#include "preqsel/gaussian.hpp"
#include "preqsel/rng.hpp"
#include "test_util.hpp"

using preqsel::CounterRng;
using preqsel::GaussianSpec;
using preqsel::hyvarinen_discrepancy;
using preqsel::hyvarinen_score;
using preqsel::kl_divergence;
using preqsel::UniGaussianSpec;
using preqsel::test::relative_gap;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

UniGaussianSpec random_uni(CounterRng& rng) {
  const double mean = 3.0 * rng.next_normal();
  const double variance = std::exp(2.0 * rng.next_normal());
  return {mean, variance};
}

}  // namespace

TEST_CASE("multivariate hyvarinen score closed form") {
  const GaussianSpec standard(vec1(0.0), Eigen::MatrixXd::Identity(1, 1));
  CHECK(hyvarinen_score(vec1(0.0), standard).value == Approx(-2.0));

  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(2, 2);
  precision(0, 0) = 2.0;
  precision(1, 1) = 3.0;
  const GaussianSpec diagonal(Eigen::VectorXd::Zero(2), precision);
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  CHECK(hyvarinen_score(x, diagonal).value == Approx(-6.0));

  // Zero precision scores zero: a fully improper marginal is fine.
  const GaussianSpec flat(vec1(0.0), Eigen::MatrixXd::Zero(1, 1));
  CHECK(hyvarinen_score(vec1(1.0), flat).value == 0.0);
}

TEST_CASE("multivariate score rejects dimension mismatches") {
  const GaussianSpec standard(vec1(0.0), Eigen::MatrixXd::Identity(1, 1));
  CHECK_THROWS_AS(hyvarinen_score(Eigen::VectorXd::Zero(2), standard),
                  std::invalid_argument);
}

TEST_CASE("GaussianSpec validates symmetry and positive semi-definiteness") {
  Eigen::MatrixXd asymmetric(2, 2);
  asymmetric << 1.0, 0.5, 0.1, 1.0;
  CHECK_THROWS_AS(GaussianSpec(Eigen::VectorXd::Zero(2), asymmetric),
                  std::invalid_argument);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(GaussianSpec(Eigen::VectorXd::Zero(2), indefinite),
                  std::invalid_argument);

  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;  // rank one, PSD
  CHECK_NOTHROW(GaussianSpec(Eigen::VectorXd::Zero(2), singular));
}

TEST_CASE("multivariate discrepancy closed form") {
  const GaussianSpec p(vec1(0.0), Eigen::MatrixXd::Identity(1, 1));
  const GaussianSpec q_shifted(vec1(1.0), Eigen::MatrixXd::Identity(1, 1));
  const GaussianSpec q_tight(vec1(0.0), 2.0 * Eigen::MatrixXd::Identity(1, 1));

  CHECK(hyvarinen_discrepancy(p, p) == Approx(0.0).margin(1e-12));
  CHECK(hyvarinen_discrepancy(p, q_shifted) == Approx(1.0));
  CHECK(hyvarinen_discrepancy(p, q_tight) == Approx(1.0));

  const GaussianSpec singular(vec1(0.0), Eigen::MatrixXd::Zero(1, 1));
  CHECK_THROWS_AS(hyvarinen_discrepancy(singular, p), std::invalid_argument);
}

TEST_CASE("univariate hyvarinen score") {
  CHECK(hyvarinen_score(0.0, UniGaussianSpec(0.0, 1.0)).value == Approx(-2.0));
  CHECK(hyvarinen_score(1.0, UniGaussianSpec(0.0, 1.0)).value == Approx(-1.0));
  CHECK(hyvarinen_score(2.0, UniGaussianSpec(0.0, 4.0)).value ==
        Approx(-0.25));
  CHECK_THROWS_AS(UniGaussianSpec(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(UniGaussianSpec(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("univariate discrepancy and KL closed forms") {
  const UniGaussianSpec p01(0.0, 1.0);
  const UniGaussianSpec q11(1.0, 1.0);
  const UniGaussianSpec p02(0.0, 2.0);

  CHECK(hyvarinen_discrepancy(p01, p01) == 0.0);
  CHECK(hyvarinen_discrepancy(p01, q11) == Approx(1.0));
  CHECK(hyvarinen_discrepancy(p02, p01) == Approx(0.5));

  CHECK(kl_divergence(p01, p01) == Approx(0.0).margin(1e-15));
  CHECK(kl_divergence(p01, q11) == Approx(0.5));
  CHECK(kl_divergence(p02, p01) == Approx(0.15342640972002736));
}

TEST_CASE("univariate and multivariate forms agree on 1-d embeddings") {
  CounterRng rng(511);
  for (int rep = 0; rep < 300; ++rep) {
    const UniGaussianSpec p = random_uni(rng);
    const UniGaussianSpec q = random_uni(rng);
    const double x = 4.0 * rng.next_normal();

    const GaussianSpec p_embedded(
        vec1(p.mean), Eigen::MatrixXd::Constant(1, 1, 1.0 / p.variance));
    const GaussianSpec q_embedded(
        vec1(q.mean), Eigen::MatrixXd::Constant(1, 1, 1.0 / q.variance));

    CHECK(relative_gap(hyvarinen_score(x, q).value,
                       hyvarinen_score(vec1(x), q_embedded).value) < 1e-12);
    CHECK(relative_gap(hyvarinen_discrepancy(p, q),
                       hyvarinen_discrepancy(p_embedded, q_embedded)) <
          1e-12);
  }
}

TEST_CASE("discrepancies are nonnegative and vanish only at equality") {
  CounterRng rng(512);
  for (int rep = 0; rep < 2000; ++rep) {
    const UniGaussianSpec p = random_uni(rng);
    const UniGaussianSpec q = random_uni(rng);
    const double disc = hyvarinen_discrepancy(p, q);
    const double kl = kl_divergence(p, q);
    CHECK(disc >= 0.0);
    CHECK(kl >= 0.0);
    // dominance: D_H >= (2 / sigma_Q^2) KL
    CHECK(disc + 1e-12 * std::max(1.0, std::abs(disc)) >=
          2.0 / q.variance * kl);
    if (std::abs(p.mean - q.mean) > 1e-3 &&
        std::abs(p.variance - q.variance) > 1e-3) {
      CHECK(disc > 0.0);
      CHECK(kl > 0.0);
    }
  }
}

TEST_CASE("expected score difference converges to the discrepancy") {
  // X ~ P; E[S(X, Q) - S(X, P)] = D(P, Q) for the proper score.
  Eigen::MatrixXd precision_p(2, 2);
  precision_p << 1.4, 0.3, 0.3, 0.9;
  Eigen::MatrixXd precision_q(2, 2);
  precision_q << 0.8, -0.2, -0.2, 1.1;
  Eigen::VectorXd mean_p(2), mean_q(2);
  mean_p << 0.3, -0.6;
  mean_q << -0.2, 0.4;
  const GaussianSpec p(mean_p, precision_p);
  const GaussianSpec q(mean_q, precision_q);

  const Eigen::MatrixXd covariance_p =
      precision_p.llt().solve(Eigen::MatrixXd::Identity(2, 2));
  const Eigen::MatrixXd root = covariance_p.llt().matrixL();

  CounterRng rng(513);
  const int draws = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXd z(2);
    z << rng.next_normal(), rng.next_normal();
    const Eigen::VectorXd x = mean_p + root * z;
    const double difference =
        hyvarinen_score(x, q).value - hyvarinen_score(x, p).value;
    sum += difference;
    sum_sq += difference * difference;
  }
  const double mean = sum / draws;
  const double variance = (sum_sq - sum * mean) / (draws - 1);
  const double standard_error = std::sqrt(variance / draws);
  CHECK(std::abs(mean - hyvarinen_discrepancy(p, q)) <
        5.0 * standard_error + 1e-12);
}
