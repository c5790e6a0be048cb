#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace neurovec {

/// Unbiased draw from [0, bound) using rejection on a 64-bit engine. Unlike
/// std::uniform_int_distribution the result is identical across standard libraries.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Seeded Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw_below(rng, i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace neurovec
