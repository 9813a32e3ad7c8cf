#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "cagefit/circuit.hpp"

namespace cagefit {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Deterministic child stream: mixes a salt into a base seed so derived
/// streams are independent of each other and of evaluation order.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

/// Initial-estimate sampling ranges, per parameter in CircuitParams order:
/// resistances and leakage reactances up to 0.15 pu (inner-cage leakage up
/// to 0.30), magnetizing reactance up to 5, core-loss resistance up to 100.
inline constexpr std::array<double, 8> kInitLo{0, 0, 0, 0, 0, 0, 0, 0};
inline constexpr std::array<double, 8> kInitHi{0.15, 0.15, 5.0,  0.15,
                                               0.30, 0.15, 0.15, 100.0};

/// Mutation noise standard deviations, scaled to each parameter's range.
inline constexpr std::array<double, 8> kMutationSigma{
    0.01, 0.01, 0.33, 0.01, 0.01, 0.01, 0.01, 6.67};

/// Smallest admissible parameter value anywhere in the estimator: keeps the
/// circuit evaluation away from exact zeros.
inline constexpr double kMinParam = 1e-6;

/// Uniform draw from [lo, hi); draws under kMinParam are re-drawn whenever
/// the range can produce a larger one.
inline double sample_in_range(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  double v = dist(rng);
  while (v < kMinParam && hi > kMinParam) v = dist(rng);
  return v;
}

/// One full genome, parameters drawn in declaration order.
inline CircuitParams sample_params(Rng& rng,
                                   const std::array<double, 8>& lo = kInitLo,
                                   const std::array<double, 8>& hi = kInitHi) {
  std::array<double, 8> raw{};
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = sample_in_range(rng, lo[i], hi[i]);
  return CircuitParams::from_array(raw);
}

}  // namespace cagefit
