#include "aitv/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "aitv/errors.hpp"

namespace aitv {

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Xoshiro256pp::below(std::uint64_t n) {
  if (n == 0) throw ParamError("below(0) is undefined");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

double log_factorial(long k) {
  if (k < 0) throw ParamError("log_factorial of a negative integer");
  static const std::vector<double> table = [] {
    std::vector<double> t(2048);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (static_cast<std::size_t>(k) < table.size()) return table[k];
  return std::lgamma(static_cast<double>(k) + 1.0);
}

long poisson_draw(double mean, Xoshiro256pp& rng) {
  if (!(mean >= 0.0)) throw DataError("poisson mean must be nonnegative");
  if (mean == 0.0) return 0;

  if (mean < 10.0) {
    // Inversion by sequential search over the pmf.
    const double u = rng.uniform01();
    double p = std::exp(-mean);
    double cum = p;
    long k = 0;
    while (u > cum && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
    }
    return k;
  }

  // Transformed rejection with squeeze (Hoermann's PTRS).
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);

  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const long k = static_cast<long>(kf);
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_mean - mean - log_factorial(k);
    if (lhs <= rhs) return k;
  }
}

}  // namespace aitv
