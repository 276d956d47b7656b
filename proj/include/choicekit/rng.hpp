#pragma once

#include <cstdint>
#include <cmath>

#include "choicekit/math.hpp"

namespace choicekit {

// splitmix64: seeds substreams and powers the counter-based generator below.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic stream of doubles keyed by (seed, stream id). Each respondent
// in the simulator gets its own stream, so generation order is
// schedule-independent.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = seed ^ (0x9e3779b97f4a7c15ull + stream * 0xda942042e4dd58b5ull);
    std::uint64_t b = splitmix64(s);
    state_ = a ^ (b + 0x632be59bd9b4e019ull);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform on (0,1); never returns 0 or 1 exactly
  double next_uniform() {
    const std::uint64_t u = next_u64() >> 11;  // 53 bits
    return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double next_normal() { return normal_quantile(next_uniform()); }

  // standard Gumbel via inverse CDF
  double next_gumbel() { return -std::log(-std::log(next_uniform())); }

  // integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace choicekit
