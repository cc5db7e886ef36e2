#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>

#include "chartduel/random.hpp"
#include "chartduel/stats.hpp"
#include "pascal_oracle.hpp"

using namespace chartduel;
using namespace chartduel::stats;

namespace {

// Frozen from the Pascal-row oracle (tests/support/pascal_oracle.hpp), 40
// digits, cross-checked against an exact rational sum.
constexpr const char* kLynxExact = "0.0004022212232531522751691974381802862690";

SubjectRecord rec(std::string id, std::int64_t correct, std::int64_t assigned,
                  Profession p = Profession::kUndeclared, std::int64_t answered = -1) {
  return {std::move(id), p, correct, answered < 0 ? assigned : answered, assigned};
}

}  // namespace

TEST(BinomialTail, LynxValueMatchesOracle) {
  const double p = binomial_tail(910, 506);
  EXPECT_NEAR(p, std::stod(kLynxExact), 1e-18);
  EXPECT_DOUBLE_EQ(round_significant(p, 2), 0.00040);
}

TEST(BinomialTail, OracleStillAgreesWithFrozenDigits) {
  auto row = oracle::pascal_row(910);
  EXPECT_EQ(oracle::scaled_decimal(oracle::range_sum(row, 506, 910), 910, 40), kLynxExact);
}

TEST(BinomialTail, SmallCasesByEnumeration) {
  EXPECT_EQ(binomial_tail(2, 1), 0.75);
  EXPECT_EQ(binomial_tail(2, 2), 0.25);
  EXPECT_EQ(binomial_tail(10, 8), 56.0 / 1024.0);
  for (std::int64_t n : {1, 7, 35, 910, 5000}) EXPECT_EQ(binomial_tail(n, 0), 1.0);
}

TEST(BinomialTail, MatchesOracleOnSmallGrid) {
  for (int n = 1; n <= 40; ++n) {
    auto row = oracle::pascal_row(n);
    for (int g = 0; g <= n; ++g) {
      const double want = oracle::tail_probability(row, g, 30);
      ASSERT_NEAR(binomial_tail(n, g), want, 1e-15 * std::max(1.0, want)) << n << "," << g;
    }
  }
}

TEST(BinomialTail, RejectsOutOfRange) {
  EXPECT_THROW(binomial_tail(0, 0), std::invalid_argument);
  EXPECT_THROW(binomial_tail(-3, 0), std::invalid_argument);
  EXPECT_THROW(binomial_tail(5, 6), std::invalid_argument);
  EXPECT_THROW(binomial_tail(5, -1), std::invalid_argument);
}

TEST(BinomialTail, ComplementAndSymmetry) {
  for (int n = 1; n <= 60; ++n) {
    for (int g = 1; g <= n; ++g) {
      ASSERT_NEAR(binomial_tail(n, g) + binomial_cdf(n, g - 1), 1.0, 1e-12);
      // Pr[X >= g] = Pr[X <= n - g] for a fair coin
      ASSERT_NEAR(binomial_tail(n, g), binomial_cdf(n, n - g), 1e-12);
    }
  }
}

TEST(BinomialTail, AllHeadsTail) {
  EXPECT_EQ(binomial_tail(35, 35), std::ldexp(1.0, -35));
  EXPECT_EQ(binomial_tail(5000, 5000), 0.0);  // 2^-5000 underflows quietly
}

TEST(SummarizeContest, LynxAggregate) {
  std::vector<SubjectRecord> rs;
  for (int i = 0; i < 26; ++i) rs.push_back(rec("s" + std::to_string(i), i < 12 ? 20 : 19, 35));
  // 12*20 + 14*19 = 506
  auto r = summarize_contest(rs, 35);
  EXPECT_EQ(r.subjects, 26);
  EXPECT_EQ(r.trials, 910);
  EXPECT_EQ(r.correct_guesses, 506);
  EXPECT_DOUBLE_EQ(round_significant(r.p_value, 2), 0.00040);
  EXPECT_NE(format_text(r).find("Pr[X >= g]      0.00040\n"), std::string::npos) << format_text(r);
}

TEST(SummarizeContest, SingleAllCorrectSubject) {
  std::vector<SubjectRecord> rs{rec("a", 35, 35)};
  auto r = summarize_contest(rs, 35);
  EXPECT_EQ(r.correct_guesses, 35);
  EXPECT_EQ(r.p_value, std::ldexp(1.0, -35));
}

TEST(SummarizeContest, HistogramByHand) {
  std::vector<SubjectRecord> rs{rec("a", 10, 35), rec("b", 20, 35), rec("c", 20, 35),
                                rec("d", 30, 35)};
  auto r = summarize_contest(rs, 35);
  EXPECT_EQ(r.histogram, (std::map<std::int64_t, std::int64_t>{{10, 1}, {20, 2}, {30, 1}}));
  EXPECT_EQ(r.correct_guesses, 80);
  EXPECT_EQ(r.trials, 140);
}

TEST(SummarizeContest, Rejections) {
  std::vector<SubjectRecord> none;
  EXPECT_THROW(summarize_contest(none, 35), std::invalid_argument);
  std::vector<SubjectRecord> mismatched{rec("a", 3, 34)};
  EXPECT_THROW(summarize_contest(mismatched, 35), std::invalid_argument);
}

TEST(SummarizeContest, JsonHasAllFields) {
  std::vector<SubjectRecord> rs{rec("a", 8, 10)};
  auto j = nlohmann::json::parse(format_json(summarize_contest(rs, 10)));
  EXPECT_EQ(j["correct_guesses"], 8);
  EXPECT_EQ(j["trials"], 10);
  EXPECT_DOUBLE_EQ(j["p_value"].get<double>(), 0.0546875);
}

TEST(SubgroupAccuracy, DirectDivision) {
  std::vector<SubjectRecord> rs{rec("f", 28, 35, Profession::kFinance),
                                rec("o", 25, 35, Profession::kOther)};
  auto s = subgroup_accuracy(rs);
  ASSERT_TRUE(s.finance_percent && s.other_percent);
  EXPECT_EQ(format_percent(*s.finance_percent), "80.0%");
  EXPECT_EQ(format_percent(*s.other_percent), "71.4%");
}

TEST(SubgroupAccuracy, EmptyGroupIsUndefined) {
  std::vector<SubjectRecord> rs{rec("f", 28, 35, Profession::kFinance)};
  auto s = subgroup_accuracy(rs);
  EXPECT_TRUE(s.finance_percent.has_value());
  EXPECT_FALSE(s.other_percent.has_value());
}

TEST(SubgroupAccuracy, UndeclaredCountsAsOther) {
  std::vector<SubjectRecord> rs{rec("u", 7, 10)};
  EXPECT_DOUBLE_EQ(*subgroup_accuracy(rs).other_percent, 70.0);
}

TEST(SubgroupAccuracy, EqualSkillGivesSmallGap) {
  SplitMix64 rng(73);
  std::vector<SubjectRecord> rs;
  for (int g = 0; g < 2; ++g) {
    for (int s = 0; s < 100; ++s) {
      std::int64_t c = 0;
      for (int t = 0; t < 100; ++t) c += uniform_unit(rng) < 0.73;
      rs.push_back(rec("x", c, 100, g == 0 ? Profession::kFinance : Profession::kOther));
    }
  }
  auto s = subgroup_accuracy(rs);
  EXPECT_LT(std::abs(*s.finance_percent - *s.other_percent), 2.0);
}

TEST(ResponseFilter, StrictlyBelowIsExcluded) {
  std::vector<SubjectRecord> rs{rec("keep", 5, 10, Profession::kOther, 5),
                                rec("drop", 2, 10, Profession::kOther, 4)};
  auto f = apply_response_filter(rs);
  ASSERT_EQ(f.kept.size(), 1u);
  EXPECT_EQ(f.kept[0].subject_id, "keep");
  ASSERT_EQ(f.excluded.size(), 1u);
  EXPECT_EQ(f.excluded[0].subject_id, "drop");
}

TEST(Formatting, SignificantFigures) {
  EXPECT_DOUBLE_EQ(round_significant(0.000402221, 2), 0.00040);
  EXPECT_DOUBLE_EQ(round_significant(0.0546875, 2), 0.055);
  EXPECT_EQ(round_significant(0.0, 2), 0.0);
}

TEST(Profession, RoundTrip) {
  for (auto p : {Profession::kFinance, Profession::kOther, Profession::kUndeclared})
    EXPECT_EQ(profession_from_string(to_string(p)), p);
  EXPECT_THROW(profession_from_string("banker"), std::invalid_argument);
}
