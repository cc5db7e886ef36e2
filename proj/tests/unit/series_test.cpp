#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "chartduel/errors.hpp"
#include "chartduel/series.hpp"

using namespace chartduel;
using namespace chartduel::series;

namespace {

// Re-sum oracle: base + prefix sums, written independently of cumulate().
std::vector<double> resum(double base, const std::vector<double>& r) {
  std::vector<double> out{base};
  for (std::size_t t = 0; t < r.size(); ++t) out.push_back(out.back() + r[t]);
  return out;
}

Permutation one_based(std::initializer_list<std::uint32_t> m) {
  Permutation p;
  for (auto v : m) p.mapping.push_back(v - 1);
  return p;
}

}  // namespace

TEST(ComputeReturns, SimpleDifferences) {
  auto r = compute_returns(PricePath({100, 101, 99}));
  EXPECT_EQ(r.returns, (std::vector<double>{1, -2}));
  EXPECT_EQ(r.base_price, 100);
}

TEST(ComputeReturns, ConstantPricesGiveZeroReturns) {
  auto r = compute_returns(PricePath({5, 5, 5, 5}));
  EXPECT_EQ(r.returns, (std::vector<double>{0, 0, 0}));
}

TEST(ComputeReturns, ReSumReproducesPath) {
  const std::vector<double> prices{0, 1, 3, 6, 10};
  auto r = compute_returns(PricePath(prices));
  EXPECT_EQ(r.returns, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(resum(r.base_price, r.returns), prices);
}

TEST(ComputeReturns, RejectsShortOrNonFinitePaths) {
  EXPECT_THROW(PricePath({1.0}), LengthError);
  EXPECT_THROW(PricePath({}), LengthError);
  EXPECT_THROW(PricePath({1.0, NAN}), std::invalid_argument);
  EXPECT_THROW(PricePath({1.0, INFINITY}), std::invalid_argument);
}

TEST(ComputeReturns, RoundTripWithinTolerance) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> prices(2 + uniform_below(rng, 300));
    double level = 50.0 + 100.0 * uniform_unit(rng);
    for (auto& p : prices) {
      p = level;
      level += standard_normal(rng) * 0.37;
    }
    auto r = compute_returns(PricePath(prices));
    auto back = r.prices();
    ASSERT_EQ(back.size(), prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
      ASSERT_TRUE(approx_equal(back[i], prices[i])) << i;
    }
  }
}

TEST(SamplePermutation, LengthOneIsIdentity) {
  SplitMix64 rng(3);
  EXPECT_EQ(sample_permutation(1, rng).mapping, (std::vector<std::uint32_t>{0}));
}

TEST(SamplePermutation, RejectsZeroLength) {
  SplitMix64 rng(3);
  EXPECT_THROW(sample_permutation(0, rng), LengthError);
}

TEST(SamplePermutation, DeterministicPerSeed) {
  EXPECT_EQ(sample_permutation(50, 1234).mapping, sample_permutation(50, 1234).mapping);
  EXPECT_NE(sample_permutation(50, 1234).mapping, sample_permutation(50, 1235).mapping);
}

TEST(SamplePermutation, RecordedSeedReproducesDraw) {
  SplitMix64 rng(99);
  rng();
  rng();
  auto p = sample_permutation(20, rng);
  EXPECT_EQ(sample_permutation(20, p.seed).mapping, p.mapping);
}

TEST(SamplePermutation, AlwaysABijection) {
  SplitMix64 rng(5);
  for (std::size_t n = 1; n < 300; n += 7) EXPECT_TRUE(sample_permutation(n, rng).is_bijection());
}

TEST(SamplePermutation, UniformOverSixOutcomes) {
  // 60 000 draws of length 3: chi-square with 5 dof, critical value at
  // alpha = 0.001 is 20.515.
  SplitMix64 rng(2024);
  std::map<std::vector<std::uint32_t>, int> counts;
  constexpr int kDraws = 60'000;
  for (int i = 0; i < kDraws; ++i) ++counts[sample_permutation(3, rng).mapping];
  ASSERT_EQ(counts.size(), 6u);
  const double expected = kDraws / 6.0;
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 20.515);
}

TEST(BuildSurrogate, HandCumulation) {
  ReturnSequence src{{1, -2, 3}, 10, 0};
  auto s = build_surrogate(src, one_based({3, 1, 2}));
  EXPECT_EQ(s.prices, (std::vector<double>{10, 13, 14, 12}));
}

TEST(BuildSurrogate, IdentityReproducesSource) {
  ReturnSequence src{{0.5, -1.25, 2, 0.75}, 7, 0};
  auto s = build_surrogate(src, one_based({1, 2, 3, 4}));
  EXPECT_EQ(s.prices, src.prices());
}

TEST(BuildSurrogate, EveryPermutationEndsAtSameFinalPrice) {
  ReturnSequence src{{1, -2, 3}, 10, 0};
  std::array<std::uint32_t, 3> m{0, 1, 2};
  int seen = 0;
  do {
    Permutation p;
    p.mapping.assign(m.begin(), m.end());
    auto s = build_surrogate(src, p);
    EXPECT_EQ(s.prices.front(), 10);
    EXPECT_EQ(s.prices.back(), 12);
    ++seen;
  } while (std::next_permutation(m.begin(), m.end()));
  EXPECT_EQ(seen, 6);
}

TEST(BuildSurrogate, RejectsLengthMismatch) {
  ReturnSequence src{{1, 2, 3}, 0, 0};
  EXPECT_THROW(build_surrogate(src, sample_permutation(2, 1)), LengthError);
}

TEST(SegmentDisjoint, ConsecutiveSegmentsWithBases) {
  std::vector<double> r(100);
  std::iota(r.begin(), r.end(), 1.0);
  ReturnSequence src{r, 0, 0};
  auto segs = segment_disjoint(src, 2, 40);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].returns.front(), 1);   // index 1
  EXPECT_EQ(segs[0].returns.back(), 40);   // index 40
  EXPECT_EQ(segs[1].returns.front(), 41);
  EXPECT_EQ(segs[1].returns.back(), 80);
  EXPECT_EQ(segs[0].base_price, 0);
  EXPECT_EQ(segs[1].base_price, 40 * 41 / 2);  // price after the first 40 returns
  EXPECT_EQ(segs[1].origin_index, 40u);
}

TEST(SegmentDisjoint, CapacityErrorNamesMaxFeasible) {
  ReturnSequence src{std::vector<double>(70, 1.0), 0, 0};
  try {
    segment_disjoint(src, 2, 40);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.max_feasible(), 1u);
    EXPECT_NE(std::string(e.what()).find("max feasible 1"), std::string::npos);
  }
}

TEST(SegmentDisjoint, ConcatenationIsSourcePrefixAndIndicesDisjoint) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ppc = 1 + uniform_below(rng, 20);
    const std::size_t count = 1 + uniform_below(rng, 10);
    std::vector<double> r(count * ppc + uniform_below(rng, 30));
    for (auto& v : r) v = standard_normal(rng);
    ReturnSequence src{r, 3.0, 0};
    auto segs = segment_disjoint(src, count, ppc);
    std::vector<double> joined;
    std::vector<bool> used(r.size(), false);
    for (const auto& s : segs) {
      joined.insert(joined.end(), s.returns.begin(), s.returns.end());
      for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_FALSE(used[s.origin_index + i]);
        used[s.origin_index + i] = true;
      }
      // base price equals the source path at the segment start
      ASSERT_TRUE(approx_equal(s.base_price, src.prices()[s.origin_index]));
    }
    ASSERT_TRUE(std::equal(joined.begin(), joined.end(), r.begin()));
  }
}

TEST(RandomShift, ZeroOffsetIsIdentity) {
  ReturnSequence src{{1, 2, 3}, 0, 0};
  EXPECT_EQ(rotate(src, 0).returns, src.returns);
}

TEST(RandomShift, HandRotation) {
  ReturnSequence src{{1, 2, 3}, 0, 0};
  EXPECT_EQ(rotate(src, 2).returns, (std::vector<double>{3, 1, 2}));
}

TEST(RandomShift, PreservesMultiset) {
  SplitMix64 rng(77);
  std::vector<double> r(53);
  for (auto& v : r) v = standard_normal(rng);
  ReturnSequence src{r, 0, 0};
  auto sorted_src = r;
  std::sort(sorted_src.begin(), sorted_src.end());
  for (int i = 0; i < 1000; ++i) {
    auto shifted = random_shift(src, rng).returns;
    std::sort(shifted.begin(), shifted.end());
    ASSERT_EQ(shifted, sorted_src);
  }
}

TEST(RandomShift, OffsetsCoverAllPositions) {
  ReturnSequence src{{0, 1, 2, 3, 4}, 0, 0};
  SplitMix64 rng(1);
  std::map<double, int> first;
  for (int i = 0; i < 5000; ++i) ++first[random_shift(src, rng).returns.front()];
  EXPECT_EQ(first.size(), 5u);
  for (const auto& [v, c] : first) EXPECT_NEAR(c, 1000, 150);
}

TEST(Degenerate, ConstantReturnsAreUndecidable) {
  EXPECT_TRUE(is_degenerate(std::vector<double>{0, 0, 0}));
  EXPECT_TRUE(is_degenerate(std::vector<double>{2.5, 2.5}));
  EXPECT_FALSE(is_degenerate(std::vector<double>{0, 0, 1}));
}

TEST(ChartWindow, ScreenCannotExceedChart) {
  EXPECT_NO_THROW((ChartWindow{80, 40, std::chrono::milliseconds(1000)}.validate()));
  EXPECT_THROW((ChartWindow{40, 80, std::chrono::milliseconds(1000)}.validate()),
               std::invalid_argument);
  EXPECT_THROW((ChartWindow{0, 0, std::chrono::milliseconds(1000)}.validate()),
               std::invalid_argument);
}
