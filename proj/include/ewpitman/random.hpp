#pragma once

// Random streams. Every simulation owns a std::mt19937_64; uniform variates are
// produced from raw 64-bit outputs here rather than through the standard
// distributions, whose algorithms are implementation-defined, so that results
// are reproducible across standard libraries.

#include <cstdint>
#include <random>

namespace ewpitman {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of work item `index` under `master`. Counter-based, so the seed of a
/// replicate does not depend on which thread runs it or in what order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform on [0,1) with 53 random bits.
template <class Gen>
inline double uniform01(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer on [0, bound) by multiply-high; bias is below bound/2^64.
template <class Gen>
inline std::uint64_t uniform_below(Gen& gen, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(gen()) * bound) >> 64);
}

}  // namespace ewpitman
