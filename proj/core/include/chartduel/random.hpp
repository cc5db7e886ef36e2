#pragma once

#include <cstdint>
#include <limits>

namespace chartduel {

/// SplitMix64: a counter-based 64-bit generator. Output k is a bijective mix
/// of (seed + k * gamma), so the stream is fully determined by the seed and
/// identical on every platform. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Unbiased integer in [0, bound) (Lemire's multiply-and-reject). bound > 0.
std::uint64_t uniform_below(SplitMix64& rng, std::uint64_t bound);

/// Fair coin.
inline bool coin_flip(SplitMix64& rng) { return (rng() >> 63) != 0; }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(SplitMix64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call; the pair's second half
/// is discarded so the draw count per call is fixed).
double standard_normal(SplitMix64& rng);

/// Derives the k-th child seed from a master seed. Distinct k give distinct
/// seeds for a fixed master (the map is a bijection of k).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept {
  return SplitMix64::mix(master + (k + 1) * SplitMix64::kGamma);
}

}  // namespace chartduel
