#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace cmdp {

/// Mixes a base seed with a tuple of stream coordinates into an independent
/// 64-bit seed (splitmix64 finaliser applied per coordinate).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t c : coords) h = mix(h ^ mix(c));
  return h;
}

using Engine = std::mt19937_64;

/// Uniform draw on [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a probability row.
template <typename Row>
int sample_index(const Row& probs, Engine& engine) {
  const double u = uniform01(engine);
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the accumulated mass
  for (int i = n - 1; i >= 0; --i)
    if (probs(i) > 0.0) return i;
  return n - 1;
}

}  // namespace cmdp
