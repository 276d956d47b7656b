#include <doctest.h>

#include <cmath>

#include "choicekit/mixing.hpp"

using namespace choicekit;

TEST_CASE("coefficient realization under each family") {
  CHECK(realize_beta({MixingFamily::lognormal, -1, -1.06, 0.87}, 0.0) ==
        doctest::Approx(-std::exp(-1.06)).epsilon(1e-12));
  CHECK(realize_beta({MixingFamily::lognormal, -1, -1.06, 0.87}, 0.0) ==
        doctest::Approx(-0.3465).epsilon(1e-3));
  CHECK(realize_beta({MixingFamily::normal, +1, 1.45, 1.33}, 0.0) == doctest::Approx(1.45));
  CHECK(realize_beta({MixingFamily::normal, +1, 1.45, 1.33}, 2.0) ==
        doctest::Approx(1.45 + 2.66).epsilon(1e-12));
  CHECK(realize_beta({MixingFamily::lognormal, +1, 0.5, 0.0}, 3.0) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(realize_beta({MixingFamily::fixed, +1, 0.7, 0.0}, 9.9) == doctest::Approx(0.7));
}

TEST_CASE("lognormal summaries reproduce the published table") {
  SUBCASE("crowding, specification 1") {
    const DistributionSummary s = lognormal_summary(-1.06, 0.87);
    CHECK(s.mean == doctest::Approx(0.506).epsilon(2e-3));
    CHECK(s.std_dev == doctest::Approx(0.538).epsilon(2e-3));
    CHECK(s.p5 == doctest::Approx(0.083).epsilon(5e-3));
    CHECK(s.p50 == doctest::Approx(0.346).epsilon(2e-3));
    CHECK(s.p95 == doctest::Approx(1.449).epsilon(2e-3));
  }
  SUBCASE("vaccine adoption, specification 1") {
    const DistributionSummary s = lognormal_summary(-0.11, 1.47);
    CHECK(s.mean == doctest::Approx(2.64).epsilon(5e-3));
    CHECK(s.p50 == doctest::Approx(0.90).epsilon(5e-3));
    CHECK(s.p95 == doctest::Approx(10.06).epsilon(5e-3));
  }
  SUBCASE("degenerate sigma") {
    const DistributionSummary s = lognormal_summary(0.0, 0.0);
    CHECK(s.mean == doctest::Approx(1.0));
    CHECK(s.std_dev == doctest::Approx(0.0));
    CHECK(s.p5 == doctest::Approx(1.0));
    CHECK(s.p50 == doctest::Approx(1.0));
    CHECK(s.p95 == doctest::Approx(1.0));
  }
  SUBCASE("utility-side sign flips and reorders quantiles") {
    const DistributionSummary s = lognormal_summary(-1.06, 0.87, -1);
    CHECK(s.mean == doctest::Approx(-0.506).epsilon(2e-3));
    CHECK(s.p5 == doctest::Approx(-1.449).epsilon(2e-3));
    CHECK(s.p95 == doctest::Approx(-0.083).epsilon(5e-3));
    CHECK(s.p5 <= s.p50);
    CHECK(s.p50 <= s.p95);
  }
}

TEST_CASE("normal summaries") {
  const DistributionSummary s = normal_summary(1.45, 1.33);
  CHECK(s.p5 == doctest::Approx(-0.738).epsilon(1e-3));
  CHECK(s.p95 == doctest::Approx(3.638).epsilon(1e-3));
  CHECK(normal_summary(0, 1).p5 == doctest::Approx(-1.6449).epsilon(1e-4));
  CHECK(normal_summary(0.35, 1.08).p5 == doctest::Approx(-1.426).epsilon(1e-3));
}

TEST_CASE("lognormal summary identities hold symbolically") {
  for (double mu : {-1.06, -0.11, 0.4}) {
    for (double sg : {0.3, 0.87, 1.47, 2.41}) {
      const DistributionSummary s = lognormal_summary(mu, sg);
      CHECK(s.std_dev * s.std_dev / (s.mean * s.mean) ==
            doctest::Approx(std::exp(sg * sg) - 1.0).epsilon(1e-12));
      CHECK(s.p95 * s.p5 == doctest::Approx(s.p50 * s.p50).epsilon(1e-12));
    }
  }
}

TEST_CASE("share of negatively affected users") {
  CHECK(share_negative(1.45, 1.33, -0.70 * 0.30) == doctest::Approx(0.175).epsilon(3e-2));
  CHECK(share_negative(1.45, 1.33, -0.70 * 0.90) == doctest::Approx(0.268).epsilon(3e-2));
  CHECK(share_negative(0.0, 2.0, 0.0) == doctest::Approx(0.5));
  CHECK(share_negative(1.0, 0.0, -2.0) == doctest::Approx(1.0));
  CHECK(share_negative(1.0, 0.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("simulation standard errors of summary functionals") {
  SUBCASE("zero covariance gives zero standard error") {
    Eigen::VectorXd theta(2);
    theta << 1.0, 2.0;
    const Eigen::MatrixXd vcov = Eigen::MatrixXd::Zero(2, 2);
    const double se = summary_std_error(
        theta, vcov, [](const Eigen::VectorXd& t) { return t[0] * t[1]; }, 2000, 1);
    CHECK(se == doctest::Approx(0.0));
  }
  SUBCASE("identity statistic recovers the marginal standard deviation") {
    Eigen::VectorXd theta(1);
    theta << 0.3;
    Eigen::MatrixXd vcov(1, 1);
    vcov << 0.49;
    const double se = summary_std_error(
        theta, vcov, [](const Eigen::VectorXd& t) { return t[0]; }, 10000, 2);
    CHECK(se == doctest::Approx(0.7).epsilon(0.03));
  }
  SUBCASE("linear statistic scales the standard deviation") {
    Eigen::VectorXd theta(1);
    theta << 0.0;
    Eigen::MatrixXd vcov(1, 1);
    vcov << 0.25;
    const double se = summary_std_error(
        theta, vcov, [](const Eigen::VectorXd& t) { return -3.0 * t[0]; }, 10000, 3);
    CHECK(se == doctest::Approx(1.5).epsilon(0.03));
  }
  SUBCASE("non-PSD covariance is rejected with the eigenvalue named") {
    Eigen::VectorXd theta(2);
    theta << 0.0, 0.0;
    Eigen::MatrixXd vcov(2, 2);
    vcov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_WITH_AS(
        summary_std_error(theta, vcov, [](const Eigen::VectorXd& t) { return t[0]; }, 100, 1),
        doctest::Contains("positive semidefinite"), std::runtime_error);
  }
}
