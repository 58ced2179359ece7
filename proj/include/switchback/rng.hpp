#pragma once

#include <cstdint>

namespace switchback {

// SplitMix64 stream. The bit-stream contract, so recorded seeds replay across
// platforms and versions:
//   state_{n+1} = state_n + 0x9e3779b97f4a7c15
//   output      = mix13(state_{n+1})
//   next_double = (output >> 11) / 2^53, in [0, 1)
//   bernoulli(p) draws one next_double and tests u < p
//   normal(mean, sd) advances the state exactly once and maps
//     ((output >> 11) + 0.5) / 2^53 through the standard normal inverse CDF
//     (no rejection loop, so consumption per call is fixed)
// A binary assignment draw therefore consumes exactly T state advances, in
// time order. Independent child streams come from derive(root, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  double normal(double mean, double sd);

  // Child seed for replication `index`: one mix13 scramble of
  // root ^ golden*(index+1), so consecutive indices land far apart.
  static std::uint64_t derive(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root ^ ((index + 1) * 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace switchback
