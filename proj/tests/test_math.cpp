#include <doctest.h>

#include <cmath>

#include "choicekit/math.hpp"

using namespace choicekit;

TEST_CASE("normal quantile and cdf invert each other") {
  for (double p : {1e-10, 1e-4, 0.025, 0.2, 0.5, 0.8, 0.975, 1.0 - 1e-4}) {
    const double z = normal_quantile(p);
    CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.05) == doctest::Approx(-1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("chi-square upper tail matches reference values") {
  // frozen from an independent implementation
  CHECK(chi_square_sf(39.0, 2) == doctest::Approx(3.398e-9).epsilon(1e-3));
  CHECK(chi_square_sf(0.6, 1) == doctest::Approx(0.438577).epsilon(1e-5));
  CHECK(chi_square_sf(281.4, 20) == doctest::Approx(4.99e-48).epsilon(1e-2));
  CHECK(chi_square_sf(495.6, 4) == doctest::Approx(5.99e-106).epsilon(1e-2));
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(0.0, 3) == doctest::Approx(1.0));
}

TEST_CASE("log_sum_exp is stable for extreme inputs") {
  const double v1[] = {800.0, 0.0};
  CHECK(log_sum_exp(v1, 2) == doctest::Approx(800.0).epsilon(1e-12));
  const double v2[] = {-800.0, -800.0};
  CHECK(log_sum_exp(v2, 2) == doctest::Approx(-800.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(hash_hex(fnv1a64("")) == "cbf29ce484222325");
  CHECK(fnv1a64("a") != fnv1a64("b"));
}
