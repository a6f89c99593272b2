#pragma once

#include <cmath>
#include <cstdint>

namespace sparselab {

// Splittable counter-based generator. Every sampling routine takes an
// explicit 64-bit seed and derives disjoint substreams with derive_seed,
// so parallel trials stay bit-reproducible regardless of scheduling.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // SplitMix64 (Steele, Lea, Flood 2014).
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping is fine at simulation scale.
    const std::uint64_t x = next_u64();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x) * n) >> 64);
  }

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Derives the seed of substream `stream` of a master seed. Distinct stream
// ids give statistically independent generators.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng mix(seed ^ (0x2545f4914f6cdd1dULL * (stream + 1)));
  mix.next_u64();
  return mix.next_u64();
}

} // namespace sparselab
