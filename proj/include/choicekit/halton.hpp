#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "choicekit/math.hpp"
#include "choicekit/rng.hpp"

namespace choicekit {

// Standard-normal quasi-Monte-Carlo draws for mixing-distribution integrals.
// Column k holds the Halton sequence in the k-th prime base, with the first
// `burn_in` points dropped, a random-shift scramble keyed by `seed`, and the
// inverse normal CDF applied.
struct DrawMatrix {
  Eigen::MatrixXd z;       // R x K standard-normal points
  std::string generator;   // provenance label
  std::uint64_t seed = 0;
  int burn_in = 10;
};

inline constexpr int kHaltonBases[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                       23, 29, 31, 37, 41, 43, 47, 53};
inline constexpr int kMaxHaltonDims = 16;

inline double halton_point(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline DrawMatrix make_draws(int r_draws, int k_dims, std::uint64_t seed,
                             int burn_in = 10) {
  if (r_draws < 1 || k_dims < 1)
    throw std::invalid_argument("make_draws: R and K must be >= 1");
  if (k_dims > kMaxHaltonDims)
    throw std::invalid_argument("make_draws: more dimensions than configured Halton bases");

  DrawMatrix d;
  d.z.resize(r_draws, k_dims);
  d.seed = seed;
  d.burn_in = burn_in;
  d.generator = "halton-shift(bases=2..," + std::to_string(kHaltonBases[k_dims - 1]) +
                ";burn=" + std::to_string(burn_in) + ";seed=" + std::to_string(seed) + ")";

  for (int k = 0; k < k_dims; ++k) {
    RandomStream stream(seed, static_cast<std::uint64_t>(k) + 1);
    const double shift = stream.next_uniform();
    const int base = kHaltonBases[k];
    for (int r = 0; r < r_draws; ++r) {
      double u = halton_point(static_cast<std::uint64_t>(r + burn_in + 1), base) + shift;
      u -= std::floor(u);
      // keep strictly inside (0,1) for the quantile transform
      if (u <= 0.0) u = 1e-12;
      if (u >= 1.0) u = 1.0 - 1e-12;
      d.z(r, k) = normal_quantile(u);
    }
  }
  return d;
}

}  // namespace choicekit
