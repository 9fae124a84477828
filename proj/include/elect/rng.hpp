#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace elect {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent task seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of task `index` under `master`: mix64(mix64(master) ^ mix64(index + 1)).
// Every parallel task (proposal, replication, training row) seeds its own
// engine through this, so results do not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 1));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Draws an index with probability proportional to weights[i]. `total` must be
// the sum of the weights and positive. Zero-weight entries are never returned.
inline std::size_t sample_weighted(std::span<const double> weights, double total, Rng& rng) {
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding can leave u marginally above the accumulated sum.
  return last_positive;
}

}  // namespace elect
