#pragma once

// Seeded random streams. The engine is std::mt19937_64; uniform and Gaussian
// variates are derived from raw 64-bit outputs by fixed formulas so that a
// given seed reproduces the same stream on every standard library.
//
// Stream splitting: replication `i` of an experiment with master seed `s`
// draws from Rng(stream_seed(s, i)), where stream_seed is two rounds of the
// SplitMix64 finaliser over (s, i). Streams therefore do not depend on the
// order in which replications are scheduled.

#include <cstdint>
#include <random>

namespace mpspec {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal via the Marsaglia polar method.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mpspec
