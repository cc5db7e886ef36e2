#include <algorithm>

#include "chartduel/store.hpp"

namespace chartduel::store {

std::map<std::string, ReplayedContest> replay(const std::vector<engine::GuessEvent>& events,
                                              double min_response_rate,
                                              std::optional<std::int64_t> charts_per_subject) {
  struct Tally {
    std::string subject_id;
    stats::Profession profession = stats::Profession::kUndeclared;
    std::int64_t events = 0;
    std::int64_t correct = 0;
    std::int64_t answered = 0;
  };
  // contest -> sessions in first-appearance order
  std::map<std::string, std::vector<std::string>> order;
  std::map<std::string, std::map<std::string, Tally>> tallies;
  for (const auto& e : events) {
    if (e.practice) continue;
    auto& sessions = tallies[e.contest_id];
    auto [it, inserted] = sessions.try_emplace(e.session_id);
    if (inserted) {
      it->second.subject_id = e.subject_id;
      it->second.profession = e.profession;
      order[e.contest_id].push_back(e.session_id);
    }
    ++it->second.events;
    if (e.choice != engine::Choice::kTimeout) ++it->second.answered;
    if (e.outcome == engine::Outcome::kCorrect) ++it->second.correct;
  }

  // Engine ids are "<contest>-s<k>" with k counting up from creation, so the
  // live ordering survives interleaved logs. Foreign ids keep log order.
  auto creation_index = [](const std::string& contest, const std::string& sid) -> std::optional<std::uint64_t> {
    const auto prefix = contest + "-s";
    if (sid.size() <= prefix.size() || sid.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    std::uint64_t k = 0;
    for (std::size_t i = prefix.size(); i < sid.size(); ++i) {
      if (sid[i] < '0' || sid[i] > '9') return std::nullopt;
      k = k * 10 + static_cast<std::uint64_t>(sid[i] - '0');
    }
    return k;
  };
  for (auto& [contest, ids] : order) {
    std::vector<std::uint64_t> keys;
    for (const auto& sid : ids) {
      const auto k = creation_index(contest, sid);
      if (!k) {
        keys.clear();
        break;
      }
      keys.push_back(*k);
    }
    if (keys.size() != ids.size()) continue;
    std::vector<std::size_t> idx(ids.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<std::string> sorted;
    for (auto i : idx) sorted.push_back(ids[i]);
    ids = std::move(sorted);
  }

  std::map<std::string, ReplayedContest> out;
  for (const auto& [contest, sessions] : tallies) {
    auto& rc = out[contest];
    std::int64_t charts = 0;
    if (charts_per_subject) {
      charts = *charts_per_subject;
    } else {
      for (const auto& [sid, t] : sessions) charts = std::max(charts, t.events);
    }
    for (const auto& sid : order[contest]) {
      const auto& t = sessions.at(sid);
      if (t.events != charts) {
        rc.incomplete_sessions.push_back(sid);
        continue;
      }
      rc.records.push_back({t.subject_id, t.profession, t.correct, t.answered,
                            t.events});
    }
    auto filtered = stats::apply_response_filter(rc.records, min_response_rate);
    rc.excluded = std::move(filtered.excluded);
    if (!filtered.kept.empty()) {
      rc.result = stats::summarize_contest(filtered.kept, charts);
      rc.result->contest_id = contest;
    }
  }
  return out;
}

}  // namespace chartduel::store
