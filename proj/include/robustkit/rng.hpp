#pragma once

#include <cmath>
#include <cstdint>

namespace robustkit {

// splitmix64 finalizer (Steele, Lea, Flood 2014). A bijection on 64-bit
// words; doubles as the seed-derivation hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Derives the seed of sub-stream `index` from `base`. Injective in `index`:
// the gamma is odd, so index*gamma walks distinct residues mod 2^64, and
// mix64 is a bijection.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + kGoldenGamma * index);
}

// Deterministic PRNG with a fully specified bit stream. std::uniform_*
// distributions are implementation-defined, so draws are derived from raw
// 64-bit outputs directly; results are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0,1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace robustkit
