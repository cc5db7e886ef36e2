#include "chartduel/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "chartduel/errors.hpp"

namespace chartduel::series {

PricePath::PricePath(std::vector<double> prices, std::size_t origin_index)
    : prices_(std::move(prices)), origin_index_(origin_index) {
  if (prices_.size() < 2) {
    throw LengthError("price path needs at least 2 prices, got " +
                      std::to_string(prices_.size()));
  }
  for (std::size_t i = 0; i < prices_.size(); ++i) {
    if (!std::isfinite(prices_[i])) {
      throw std::invalid_argument("non-finite price at index " + std::to_string(i));
    }
  }
}

std::vector<double> ReturnSequence::prices() const { return cumulate(base_price, returns); }

bool Permutation::is_bijection() const {
  std::vector<bool> seen(mapping.size(), false);
  for (auto m : mapping) {
    if (m >= mapping.size() || seen[m]) return false;
    seen[m] = true;
  }
  return true;
}

void ChartWindow::validate() const {
  if (points_per_chart == 0 || points_per_screen == 0) {
    throw std::invalid_argument("points_per_chart and points_per_screen must be positive");
  }
  if (points_per_screen > points_per_chart) {
    throw std::invalid_argument("points_per_screen exceeds points_per_chart");
  }
  if (tick_interval.count() <= 0) {
    throw std::invalid_argument("tick_interval must be positive");
  }
}

ReturnSequence compute_returns(const PricePath& path) {
  const auto p = path.prices();
  ReturnSequence out;
  out.base_price = p.front();
  out.origin_index = path.origin_index();
  out.returns.resize(p.size() - 1);
  std::adjacent_difference(p.begin() + 1, p.end(), out.returns.begin());
  out.returns[0] = p[1] - p[0];
  return out;
}

Permutation sample_permutation(std::size_t length, SplitMix64& rng) {
  if (length == 0) throw LengthError("permutation length must be at least 1");
  Permutation perm;
  perm.seed = rng.state();
  perm.mapping.resize(length);
  std::iota(perm.mapping.begin(), perm.mapping.end(), 0U);
  for (std::size_t i = length - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i + 1));
    std::swap(perm.mapping[i], perm.mapping[j]);
  }
  return perm;
}

Permutation sample_permutation(std::size_t length, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample_permutation(length, rng);
}

SurrogatePath build_surrogate(const ReturnSequence& source, const Permutation& perm) {
  if (perm.size() != source.size()) {
    throw LengthError("permutation length " + std::to_string(perm.size()) +
                      " does not match return count " + std::to_string(source.size()));
  }
  SurrogatePath out;
  out.prices.reserve(source.size() + 1);
  out.prices.push_back(source.base_price);
  double level = source.base_price;
  for (auto idx : perm.mapping) {
    level += source.returns[idx];
    out.prices.push_back(level);
  }
  out.permutation = perm;
  out.source_origin = source.origin_index;
  return out;
}

std::vector<ReturnSequence> segment_disjoint(const ReturnSequence& source, std::size_t count,
                                             std::size_t points_per_chart) {
  if (points_per_chart == 0) throw std::invalid_argument("points_per_chart must be positive");
  const std::size_t feasible = source.size() / points_per_chart;
  if (count > feasible) {
    throw CapacityError("need " + std::to_string(count * points_per_chart) + " returns for " +
                            std::to_string(count) + " segments, have " +
                            std::to_string(source.size()) + " (max feasible " +
                            std::to_string(feasible) + ")",
                        feasible);
  }
  std::vector<ReturnSequence> out;
  out.reserve(count);
  double base = source.base_price;
  for (std::size_t s = 0; s < count; ++s) {
    const auto first = source.returns.begin() + static_cast<std::ptrdiff_t>(s * points_per_chart);
    ReturnSequence seg;
    seg.returns.assign(first, first + static_cast<std::ptrdiff_t>(points_per_chart));
    seg.base_price = base;
    seg.origin_index = source.origin_index + s * points_per_chart;
    base = std::accumulate(seg.returns.begin(), seg.returns.end(), base);
    out.push_back(std::move(seg));
  }
  return out;
}

ReturnSequence rotate(const ReturnSequence& source, std::size_t offset) {
  if (source.returns.empty()) throw LengthError("cannot rotate an empty return sequence");
  ReturnSequence out = source;
  std::rotate(out.returns.begin(),
              out.returns.begin() + static_cast<std::ptrdiff_t>(offset % source.size()),
              out.returns.end());
  return out;
}

ReturnSequence random_shift(const ReturnSequence& source, SplitMix64& rng) {
  if (source.returns.empty()) throw LengthError("cannot shift an empty return sequence");
  return rotate(source, static_cast<std::size_t>(uniform_below(rng, source.size())));
}

ReturnSequence circular_window(const ReturnSequence& source, std::size_t start,
                               std::size_t length) {
  if (source.returns.empty()) throw LengthError("cannot window an empty return sequence");
  const std::size_t n = source.size();
  start %= n;
  ReturnSequence out;
  out.returns.reserve(length);
  double base = source.base_price;
  for (std::size_t i = 0; i < start; ++i) base += source.returns[i];
  for (std::size_t i = 0; i < length; ++i) out.returns.push_back(source.returns[(start + i) % n]);
  out.base_price = base;
  out.origin_index = source.origin_index + start;
  return out;
}

bool is_degenerate(std::span<const double> returns) {
  return std::adjacent_find(returns.begin(), returns.end(), std::not_equal_to<>{}) ==
         returns.end();
}

std::vector<double> cumulate(double base, std::span<const double> returns) {
  std::vector<double> prices;
  prices.reserve(returns.size() + 1);
  prices.push_back(base);
  for (double r : returns) {
    base += r;
    prices.push_back(base);
  }
  return prices;
}

bool approx_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace chartduel::series
