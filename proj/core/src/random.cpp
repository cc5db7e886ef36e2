#include "chartduel/random.hpp"

#include <cmath>
#include <numbers>

namespace chartduel {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t uniform_below(SplitMix64& rng, std::uint64_t bound) {
  u128 product = static_cast<u128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double standard_normal(SplitMix64& rng) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace chartduel
