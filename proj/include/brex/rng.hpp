#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace brex {

using Rng = std::mt19937_64;

/// Independent stream for a (seed, tag...) path. Used so that parallel tasks
/// never share a generator and results do not depend on scheduling.
Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {});

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace brex
