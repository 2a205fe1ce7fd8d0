#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness helpers. The engine is std::mt19937_64, whose
// output sequence is pinned by the C++ standard, and every draw on top of it
// (uniform reals, bounded integers, normals) is implemented here rather than
// via std::*_distribution, whose output is implementation-defined. Seeded
// pipelines therefore reproduce bit-identically across runs, thread counts
// and standard libraries.

namespace lulc {

using Rng = std::mt19937_64;

// One SplitMix64 step. Only used to mix seeds, not as the main engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed from a master seed and up to three indices
// (tree number, ensemble member, repetition, ...). Work seeded this way can
// run in any order or on any thread without changing results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= (a + 1) * 0x9e3779b97f4a7c15ULL;
  (void)splitmix64(s);
  s ^= (b + 1) * 0xc2b2ae3d27d4eb4fULL;
  (void)splitmix64(s);
  s ^= (c + 1) * 0x165667b19e3779f9ULL;
  return splitmix64(s);
}

// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unbiased uniform integer in [0, n) by rejection sampling.
inline std::uint64_t bounded(Rng& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

// Standard normal via the Box-Muller transform: two uniform draws map to
// sqrt(-2 ln u1) * cos(2 pi u2). The sine twin is discarded, which keeps the
// generator stateless (exactly two engine draws per normal).
inline double normal(Rng& rng) {
  const double u1 = double((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = double(rng() >> 11) * 0x1.0p-53;        // [0, 1)
  constexpr double two_pi = 6.28318530717958647692528676655900577;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates. With k < v.size() only the first k slots are finalized
// (partial shuffle), which is all a without-replacement draw of k needs.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t k, Rng& rng) {
  const std::size_t n = v.size();
  if (n == 0) return;
  if (k > n - 1) k = n - 1;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::size_t(bounded(rng, n - i));
    std::swap(v[i], v[j]);
  }
}

}  // namespace lulc
