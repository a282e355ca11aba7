#pragma once

#include <cstdint>

namespace aitv {

// xoshiro256++ with SplitMix64 state expansion; fixed algorithm so that
// seeded runs reproduce bit-for-bit everywhere.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);

  std::uint64_t next();

  // Uniform double in [0,1) with 53 random bits.
  double uniform01();

  // Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

// One Poisson draw with the given mean: sequential inversion below mean 10,
// transformed rejection above.  Deterministic for a given generator state.
long poisson_draw(double mean, Xoshiro256pp& rng);

// log(k!) via a cached table of partial sums of logs.
double log_factorial(long k);

}  // namespace aitv
