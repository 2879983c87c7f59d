#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace spinamp {

// Counter-based randomness: every random decision is a pure function of a
// key and a counter, so results do not depend on evaluation order.
// The mixer is the SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ull;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

// Uniform double in [0,1) from 53 high bits.
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Bernoulli(p) for counter `n` under `key`.
inline constexpr bool bernoulli(std::uint64_t key, std::uint64_t n, double p) noexcept {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return to_unit(mix64(key ^ mix64(n))) < p;
}

// Lanes of a 64-bit mask set independently with probability p, for the run
// of `m` counters starting at `first`. Uses geometric gaps, so the cost is
// about 1 + m*p draws.
inline std::uint64_t bernoulli_mask(std::uint64_t key, std::uint64_t first, unsigned m, double p) noexcept {
  if (p <= 0.0 || m == 0) return 0;
  const std::uint64_t all = m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  if (p >= 1.0) return all;
  const std::uint64_t chunk_key = mix64(key ^ mix64(first));
  const double log_q = std::log1p(-p);
  std::uint64_t mask = 0;
  std::uint64_t pos = 0;
  for (std::uint64_t draw = 0;; ++draw) {
    // 1 - u lies in (0, 1], so the logarithm is finite.
    const double u = to_unit(mix64(chunk_key + draw));
    pos += static_cast<std::uint64_t>(std::floor(std::log1p(-u) / log_q));
    if (pos >= m) break;
    mask |= std::uint64_t{1} << pos;
    ++pos;
  }
  return mask;
}

// Stream domains that keep keys of different purposes apart.
enum class Stream : std::uint64_t {
  initial = 1,
  gate = 2,
  diffusion = 3,
  spectrum = 4,
};

}  // namespace spinamp
