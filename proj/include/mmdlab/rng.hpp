#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace mmdlab {

// Deterministic, platform-independent generator for sampling decisions.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // uniform in [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// All unordered pairs when they fit; otherwise `max_pairs` sampled index
// pairs from a fixed-seed generator. Pairs are (i, j) indices with i < j.
inline std::vector<std::pair<std::int32_t, std::int32_t>> sample_index_pairs(
    std::int64_t n, std::int64_t max_pairs, std::uint64_t seed) {
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  if (n < 2) return pairs;
  const std::int64_t all = n * (n - 1) / 2;
  if (all <= max_pairs) {
    pairs.reserve(static_cast<std::size_t>(all));
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  SplitMix64 rng(seed);
  pairs.reserve(static_cast<std::size_t>(max_pairs));
  while (static_cast<std::int64_t>(pairs.size()) < max_pairs) {
    auto i = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    auto j = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace mmdlab
