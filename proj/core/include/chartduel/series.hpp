#pragma once

// Price series, returns and permutation surrogates.
//
// Returns are arithmetic price differences r_t = p_t - p_{t-1}, not log
// returns. A surrogate path starts at the same base price and cumulates the
// same returns in a uniformly permuted order, so it shares every moment of
// the return distribution with the real path but none of its temporal
// structure.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chartduel/random.hpp"

namespace chartduel::series {

/// Relative tolerance for comparing prices and returns after reordering.
inline constexpr double kRelTolerance = 1e-9;

/// Ordered finite prices p_0..p_T, T >= 1.
class PricePath {
 public:
  /// Throws LengthError for fewer than 2 prices, std::invalid_argument for a
  /// non-finite price.
  explicit PricePath(std::vector<double> prices, std::size_t origin_index = 0);

  std::span<const double> prices() const noexcept { return prices_; }
  std::size_t size() const noexcept { return prices_.size(); }
  double front() const noexcept { return prices_.front(); }
  double back() const noexcept { return prices_.back(); }
  std::size_t origin_index() const noexcept { return origin_index_; }

 private:
  std::vector<double> prices_;
  std::size_t origin_index_;
};

/// r_1..r_T with the base price p_0 they start from. `origin_index` is the
/// 0-based position of returns[0] in the dataset's full return array.
struct ReturnSequence {
  std::vector<double> returns;
  double base_price = 0.0;
  std::size_t origin_index = 0;

  std::size_t size() const noexcept { return returns.size(); }
  /// base_price followed by the running sums.
  std::vector<double> prices() const;
};

/// A bijection on {0..T-1}; mapping[k] is the source index placed at
/// position k. (Index arrays are 0-based; the mathematical pi(k) is 1-based.)
struct Permutation {
  std::vector<std::uint32_t> mapping;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return mapping.size(); }
  bool is_bijection() const;
};

struct SurrogatePath {
  std::vector<double> prices;
  Permutation permutation;
  std::size_t source_origin = 0;
};

struct ChartWindow {
  std::uint32_t points_per_chart = 80;
  std::uint32_t points_per_screen = 40;
  std::chrono::milliseconds tick_interval{1000};

  /// Throws std::invalid_argument unless 0 < points_per_screen <= points_per_chart.
  void validate() const;
};

ReturnSequence compute_returns(const PricePath& path);

/// Uniform draw from all length! permutations (Fisher-Yates). Records the
/// generator state on entry as the seed, so SplitMix64(perm.seed) reproduces it.
Permutation sample_permutation(std::size_t length, SplitMix64& rng);
Permutation sample_permutation(std::size_t length, std::uint64_t seed);

/// prices[t] = base + sum_{k<t} returns[mapping[k]].
SurrogatePath build_surrogate(const ReturnSequence& source, const Permutation& perm);

/// `count` consecutive non-overlapping segments of `points_per_chart` returns
/// from the start of `source`. Throws CapacityError carrying the largest
/// feasible count.
std::vector<ReturnSequence> segment_disjoint(const ReturnSequence& source, std::size_t count,
                                             std::size_t points_per_chart);

/// Circular left rotation by `offset` (result[i] = returns[(i + offset) % T]).
ReturnSequence rotate(const ReturnSequence& source, std::size_t offset);

/// Rotation by an offset drawn uniformly from {0..T-1}.
ReturnSequence random_shift(const ReturnSequence& source, SplitMix64& rng);

/// Window of `length` returns starting at `start`, wrapping around the end.
ReturnSequence circular_window(const ReturnSequence& source, std::size_t start,
                               std::size_t length);

/// True when every return is identical; such a segment yields a surrogate
/// equal to the real chart.
bool is_degenerate(std::span<const double> returns);

/// base followed by running sums of `returns`.
std::vector<double> cumulate(double base, std::span<const double> returns);

/// |a - b| <= tol * max(1, |a|, |b|).
bool approx_equal(double a, double b, double tol = kRelTolerance);

}  // namespace chartduel::series
