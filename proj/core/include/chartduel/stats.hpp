#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartduel/binomial.hpp"

namespace chartduel::stats {

enum class Profession { kFinance, kOther, kUndeclared };

std::string to_string(Profession p);
/// Accepts "finance", "other", "undeclared"; anything else throws.
Profession profession_from_string(const std::string& s);

/// One subject's tally in one contest. Timeouts already count as incorrect.
struct SubjectRecord {
  std::string subject_id;
  Profession profession = Profession::kUndeclared;
  std::int64_t correct = 0;
  std::int64_t answered = 0;
  std::int64_t assigned = 0;

  bool operator==(const SubjectRecord&) const = default;
};

/// Aggregate outcome of a contest: s subjects, c charts each, g correct out of
/// n = s*c, the histogram of per-subject correct counts, and Pr[X >= g].
struct ContestResult {
  std::string contest_id;
  std::int64_t subjects = 0;
  std::int64_t charts_per_subject = 0;
  std::int64_t correct_guesses = 0;
  std::int64_t trials = 0;
  std::map<std::int64_t, std::int64_t> histogram;
  double p_value = 1.0;

  bool operator==(const ContestResult&) const = default;
};

/// Throws std::invalid_argument for an empty list or a record whose assigned
/// count differs from `charts_per_subject`.
ContestResult summarize_contest(std::span<const SubjectRecord> records,
                                std::int64_t charts_per_subject);

struct SubgroupAccuracy {
  std::optional<double> finance_percent;
  std::optional<double> other_percent;  // includes undeclared
};

SubgroupAccuracy subgroup_accuracy(std::span<const SubjectRecord> records);

struct Exclusion {
  std::string subject_id;
  std::int64_t answered = 0;
  std::int64_t assigned = 0;
};

struct FilteredRecords {
  std::vector<SubjectRecord> kept;
  std::vector<Exclusion> excluded;
};

/// Default minimum answered/assigned ratio for inclusion in the aggregate.
inline constexpr double kDefaultMinResponseRate = 0.5;

/// Drops subjects whose response rate is strictly below `min_rate`.
FilteredRecords apply_response_filter(std::span<const SubjectRecord> records,
                                      double min_rate = kDefaultMinResponseRate);

/// Percentages to one decimal place, p-value to 5 decimals and 2 significant
/// figures ("p = 0.00040").
std::string format_text(const ContestResult& result);
std::string format_json(const ContestResult& result);
std::string format_percent(double percent);

/// Rounds to `digits` significant figures (used for reporting only).
double round_significant(double value, int digits);

}  // namespace chartduel::stats
