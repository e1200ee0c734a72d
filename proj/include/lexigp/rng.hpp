#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace lexigp {

using Rng = std::mt19937_64;

// Uniform integer in [0, n) via Lemire's multiply-shift rejection method.
// Implemented here instead of std::uniform_int_distribution so that streams
// are identical across standard libraries. n <= 1 returns 0 without
// consuming a draw.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  while (true) {
    const std::uint64_t x = rng();
    const __uint128_t m = static_cast<__uint128_t>(x) * n;
    const auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      if (low < threshold) continue;
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
}

// Uniform double in [lo, hi) with 53 bits of resolution.
inline double uniform_real(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

// Fisher-Yates shuffle, bottom-up, using uniform_index.
template <typename T>
void shuffle_span(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

inline std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle_span(std::span<int>(order), rng);
  return order;
}

// FNV-1a, the fixed hash behind experiment seed derivation. Byte order is
// pinned (little-endian absorption of integers) so derived seeds agree
// across platforms.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()); }
  Fnv1a& u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(b, 8);
  }
  Fnv1a& sep() {
    const unsigned char b = 0x1f;
    return bytes(&b, 1);
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace lexigp
