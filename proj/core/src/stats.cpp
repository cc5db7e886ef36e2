#include "chartduel/stats.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace chartduel::stats {

std::string to_string(Profession p) {
  switch (p) {
    case Profession::kFinance:
      return "finance";
    case Profession::kOther:
      return "other";
    case Profession::kUndeclared:
      return "undeclared";
  }
  return "undeclared";
}

Profession profession_from_string(const std::string& s) {
  if (s == "finance") return Profession::kFinance;
  if (s == "other") return Profession::kOther;
  if (s == "undeclared" || s.empty()) return Profession::kUndeclared;
  throw std::invalid_argument("unknown profession '" + s + "'");
}

ContestResult summarize_contest(std::span<const SubjectRecord> records,
                                std::int64_t charts_per_subject) {
  if (records.empty()) throw std::invalid_argument("cannot summarize a contest with no subjects");
  if (charts_per_subject < 1) throw std::invalid_argument("charts_per_subject must be >= 1");

  ContestResult out;
  out.subjects = static_cast<std::int64_t>(records.size());
  out.charts_per_subject = charts_per_subject;
  for (const auto& r : records) {
    if (r.assigned != charts_per_subject) {
      throw std::invalid_argument("subject " + r.subject_id + " was assigned " +
                                  std::to_string(r.assigned) + " charts, expected " +
                                  std::to_string(charts_per_subject));
    }
    if (r.correct < 0 || r.correct > r.answered || r.answered > r.assigned) {
      throw std::invalid_argument("subject " + r.subject_id +
                                  " violates correct <= answered <= assigned");
    }
    out.correct_guesses += r.correct;
    ++out.histogram[r.correct];
  }
  out.trials = out.subjects * charts_per_subject;
  out.p_value = binomial_tail(out.trials, out.correct_guesses);
  return out;
}

SubgroupAccuracy subgroup_accuracy(std::span<const SubjectRecord> records) {
  std::int64_t fin_correct = 0, fin_assigned = 0, oth_correct = 0, oth_assigned = 0;
  for (const auto& r : records) {
    if (r.profession == Profession::kFinance) {
      fin_correct += r.correct;
      fin_assigned += r.assigned;
    } else {
      oth_correct += r.correct;
      oth_assigned += r.assigned;
    }
  }
  SubgroupAccuracy out;
  if (fin_assigned > 0) out.finance_percent = 100.0 * fin_correct / fin_assigned;
  if (oth_assigned > 0) out.other_percent = 100.0 * oth_correct / oth_assigned;
  return out;
}

FilteredRecords apply_response_filter(std::span<const SubjectRecord> records, double min_rate) {
  FilteredRecords out;
  for (const auto& r : records) {
    // answered / assigned < min_rate, without dividing
    if (static_cast<double>(r.answered) < min_rate * static_cast<double>(r.assigned)) {
      out.excluded.push_back({r.subject_id, r.answered, r.assigned});
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double magnitude = std::floor(std::log10(std::abs(value)));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(value * scale) / scale;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", percent);
  return buf;
}

namespace {

std::string format_p(double p) {
  char buf[64];
  if (p >= 1e-5) {
    std::snprintf(buf, sizeof buf, "%.5f", round_significant(p, 2));
  } else {
    std::snprintf(buf, sizeof buf, "%.2g", p);
  }
  return buf;
}

}  // namespace

std::string format_text(const ContestResult& r) {
  std::ostringstream os;
  if (!r.contest_id.empty()) os << "contest " << r.contest_id << "\n";
  os << "  subjects (s)            " << r.subjects << "\n"
     << "  charts per subject (c)  " << r.charts_per_subject << "\n"
     << "  trials (n = s*c)        " << r.trials << "\n"
     << "  correct guesses (g)     " << r.correct_guesses << "\n";
  if (r.trials > 0) {
    os << "  accuracy                "
       << format_percent(100.0 * static_cast<double>(r.correct_guesses) /
                         static_cast<double>(r.trials))
       << "\n";
  }
  os << "  p-value Pr[X >= g]      " << format_p(r.p_value) << "\n"
     << "  histogram (correct: subjects)\n";
  for (const auto& [k, v] : r.histogram) os << "    " << k << ": " << v << "\n";
  return os.str();
}

std::string format_json(const ContestResult& r) {
  nlohmann::ordered_json j;
  j["contest_id"] = r.contest_id;
  j["subjects"] = r.subjects;
  j["charts_per_subject"] = r.charts_per_subject;
  j["trials"] = r.trials;
  j["correct_guesses"] = r.correct_guesses;
  j["p_value"] = r.p_value;
  auto hist = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.histogram) hist[std::to_string(k)] = v;
  j["histogram"] = hist;
  return j.dump();
}

}  // namespace chartduel::stats
