#include <doctest.h>

#include <cmath>

#include "choicekit/halton.hpp"

using namespace choicekit;

TEST_CASE("halton sequence starts as expected in base 2 and 3") {
  CHECK(halton_point(1, 2) == doctest::Approx(0.5));
  CHECK(halton_point(2, 2) == doctest::Approx(0.25));
  CHECK(halton_point(3, 2) == doctest::Approx(0.75));
  CHECK(halton_point(1, 3) == doctest::Approx(1.0 / 3));
  CHECK(halton_point(2, 3) == doctest::Approx(2.0 / 3));
  CHECK(halton_point(4, 3) == doctest::Approx(4.0 / 9));
}

TEST_CASE("draw columns are standardized") {
  const int R = 1000;
  const DrawMatrix d = make_draws(R, 6, 42);
  for (int k = 0; k < 6; ++k) {
    const double mean = d.z.col(k).mean();
    const double var = (d.z.col(k).array() - mean).square().sum() / (R - 1);
    CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(R)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.10));
  }
}

TEST_CASE("draws are deterministic given the seed") {
  const DrawMatrix a = make_draws(64, 4, 7);
  const DrawMatrix b = make_draws(64, 4, 7);
  CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() == 0.0);
  const DrawMatrix c = make_draws(64, 4, 8);
  CHECK((a.z - c.z).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("dimension limits are enforced") {
  CHECK_THROWS(make_draws(10, kMaxHaltonDims + 1, 1));
  CHECK_THROWS(make_draws(0, 1, 1));
}
