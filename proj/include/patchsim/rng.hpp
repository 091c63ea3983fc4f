#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace patchsim {

/// Every random stream in the project is a std::mt19937_64. Draws go through
/// the helpers below rather than <random> distributions, whose algorithms are
/// implementation-defined, so runs replay across standard libraries.
using Rng = std::mt19937_64;
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: stream k of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Stream tags for the top-level seed.
namespace streams {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t calibration = 2;
inline constexpr std::uint64_t ensemble = 3;
}  // namespace streams

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on (0, 1].
inline double uniform01_open_zero(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Exponential waiting time with the given rate (> 0).
inline double exponential(Rng& rng, double rate) { return -std::log(uniform01_open_zero(rng)) / rate; }

/// Unbiased integer in [0, n), n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Index drawn with probability proportional to weights (not all zero).
inline std::size_t categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double target = uniform01(rng) * total;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    last_positive = k;
    if (target < weights[k]) return k;
    target -= weights[k];
  }
  return last_positive;
}

}  // namespace patchsim
