#pragma once

#include <cstdint>
#include <initializer_list>

namespace sdg {

// splitmix64 finalizer (Steele/Lea/Flood). Stable across platforms; every
// random draw in the pipeline bottoms out here so outputs are byte-identical
// for any worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Mixes a master seed with integer coordinates (config id, background id, ...)
// into a per-item seed. Chained avalanche; collision-free across the default
// factorial grid (checked exhaustively in tests).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ull);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x9e3779b97f4a7c15ull));
  return h;
}

// Minimal counter-based generator over the splitmix64 finalizer.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). n must be >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Multiply-shift reduction; bias is negligible for the small n used here.
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return next_double() < p; }

private:
  std::uint64_t state_;
};

}  // namespace sdg
