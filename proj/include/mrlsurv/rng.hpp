#pragma once

// Seed splitting for resampling: replicate b of a run seeded with `seed` draws
// from its own generator, so its output is a function of (seed, b) only.

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace mrlsurv {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t replicate) {
  return splitmix64(splitmix64(master) ^ splitmix64(replicate + 0x5851F42D4C957F2DULL));
}

inline Rng replicate_rng(std::uint64_t master, std::uint64_t replicate) {
  return Rng(replicate_seed(master, replicate));
}

// Unbiased draw from {0, ..., n-1}; n > 0. Does not depend on the standard
// library's distribution implementation.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace mrlsurv
