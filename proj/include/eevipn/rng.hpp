#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace eevipn {

// SplitMix64 (Steele/Lea/Flood). One 64-bit word of state, the same stream on
// every platform and standard library. All randomness used to build problem
// instances flows through this generator, so a single seed reproduces an
// instance bit-for-bit anywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Unbiased integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("SplitMix64::below: n == 0");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // k distinct values from {0, ..., n-1}, returned sorted ascending.
  // Partial Fisher-Yates, so the draw sequence is part of the frozen format.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || n < 0 || k > n)
      throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int t = 0; t < k; ++t) {
      const int j = t + static_cast<int>(below(static_cast<std::uint64_t>(n - t)));
      std::swap(pool[t], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k);
    for (std::size_t a = 1; a < out.size(); ++a)
      for (std::size_t b = a; b > 0 && out[b - 1] > out[b]; --b)
        std::swap(out[b - 1], out[b]);
    return out;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent sub-seed from a master seed, so topology, request
// and capability generation each get their own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
  return g.next_u64();
}

}  // namespace eevipn
