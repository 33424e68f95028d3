#pragma once

#include <cstdint>

namespace memv {

// splitmix64 step; also used as the key-mixing finalizer.
std::uint64_t splitmix64(std::uint64_t& state);

// Combine stream identifiers into one 64-bit key.
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

// xoshiro256++ with splitmix64 seeding. Deterministic given the key;
// distinct keys give statistically independent streams.
class Rng {
 public:
  explicit Rng(std::uint64_t key);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();
  double normal(double mean, double stddev);

 private:
  std::uint64_t s_[4];
};

}  // namespace memv
