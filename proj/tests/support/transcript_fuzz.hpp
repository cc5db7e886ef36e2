#pragma once
// Single-fault injection into real session transcripts. Each fault is built
// so that a correct validator reports exactly one violation with a known code.
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartduel/random.hpp"
#include "chartduel/simulation.hpp"
#include "chartduel/synthetic.hpp"
#include "chartduel/transcript.hpp"

namespace fuzz {

using chartduel::protocol::Direction;
using chartduel::protocol::Transcript;
using chartduel::protocol::TranscriptEntry;
using json = nlohmann::ordered_json;

struct Frame {
  Direction dir;
  json body;
};

inline std::vector<Frame> unpack(const Transcript& t) {
  std::vector<Frame> out;
  for (const auto& e : t) out.push_back({e.dir, json::parse(e.frame)});
  return out;
}

inline Transcript pack(const std::vector<Frame>& frames) {
  Transcript t;
  for (const auto& f : frames) t.push_back({f.dir, f.body.dump()});
  return t;
}

inline void renumber(std::vector<Frame>& frames) {
  std::uint64_t seq[2] = {0, 0};
  for (auto& f : frames) f.body["seq"] = ++seq[f.dir == Direction::kClientToServer ? 0 : 1];
}

inline bool is(const Frame& f, const char* kind) { return f.body["kind"] == kind; }

// Index of the first frame at or after `from` of `kind` for `trial`.
inline std::optional<std::size_t> find(const std::vector<Frame>& fs, std::size_t from,
                                       const char* kind, const std::string& trial = {}) {
  for (std::size_t i = from; i < fs.size(); ++i) {
    if (is(fs[i], kind) && (trial.empty() || fs[i].body.value("trial_id", "") == trial)) return i;
  }
  return std::nullopt;
}

struct TrialSpan {
  std::string id;
  std::size_t start = 0;
  std::size_t end = 0;  // index of trial_end
  std::optional<std::size_t> guess;
  std::optional<std::size_t> feedback;
  std::string outcome;
  std::vector<std::size_t> ticks;
};

inline std::vector<TrialSpan> trials(const std::vector<Frame>& fs) {
  std::vector<TrialSpan> out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!is(fs[i], "trial_start")) continue;
    TrialSpan t;
    t.id = fs[i].body["trial_id"];
    t.start = i;
    auto end = find(fs, i, "trial_end", t.id);
    if (!end) continue;
    t.end = *end;
    t.outcome = fs[*end].body["outcome"];
    for (std::size_t k = i + 1; k < *end; ++k) {
      if (is(fs[k], "tick")) t.ticks.push_back(k);
      if (is(fs[k], "guess")) t.guess = k;
      if (is(fs[k], "feedback")) t.feedback = k;
    }
    out.push_back(std::move(t));
  }
  return out;
}

struct Injected {
  Transcript transcript;
  std::string code;
};

using Rng = chartduel::SplitMix64;

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[chartduel::uniform_below(rng, v.size())];
}

// Each injector returns nullopt when the transcript offers no suitable site.
using Injector = std::function<std::optional<std::vector<Frame>>(std::vector<Frame>, Rng&)>;

struct FaultType {
  const char* code;
  Injector inject;
};

inline std::vector<std::size_t> s2c_indices(const std::vector<Frame>& fs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].dir == Direction::kServerToClient) out.push_back(i);
  return out;
}

inline std::vector<FaultType> fault_types() {
  namespace v = chartduel::protocol::violation;
  std::vector<FaultType> f;

  f.push_back({v::kSequence, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 auto s2c = s2c_indices(fs);
                 if (s2c.size() < 3) return std::nullopt;
                 const auto k = 1 + chartduel::uniform_below(rng, s2c.size() - 1);
                 fs[s2c[k]].body["seq"] = fs[s2c[k - 1]].body["seq"];
                 return fs;
               }});

  f.push_back({v::kFeedbackWithoutGuess, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<std::size_t> sites;
                 for (const auto& t : trials(fs))
                   if (t.guess) sites.push_back(*t.guess);
                 if (sites.empty()) return std::nullopt;
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(pick(sites, rng)));
                 return fs;
               }});

  f.push_back({v::kLeak, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<std::size_t> sites;
                 for (std::size_t i = 0; i < fs.size(); ++i)
                   if (is(fs[i], "tick") || is(fs[i], "trial_start")) sites.push_back(i);
                 if (sites.empty()) return std::nullopt;
                 static const char* names[] = {"placement", "real_slot", "is_real", "truth"};
                 fs[pick(sites, rng)].body[names[chartduel::uniform_below(rng, 4)]] = "top";
                 return fs;
               }});

  f.push_back({v::kUnpairedTick, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<std::size_t> sites;
                 for (const auto& t : trials(fs))
                   for (auto i : t.ticks) sites.push_back(i);
                 if (sites.empty()) return std::nullopt;
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(pick(sites, rng)));
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kDuplicateGuess, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<std::size_t> sites;
                 for (const auto& t : trials(fs))
                   if (t.guess) sites.push_back(*t.guess);
                 if (sites.empty()) return std::nullopt;
                 const auto at = pick(sites, rng);
                 auto copy = fs[at];
                 if (chartduel::coin_flip(rng)) copy.body["choice"] = copy.body["choice"] == "top" ? "bottom" : "top";
                 fs.insert(fs.begin() + static_cast<std::ptrdiff_t>(at + 1), copy);
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kTickAfterGuess, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<TrialSpan> sites;
                 for (auto& t : trials(fs))
                   if (t.guess) sites.push_back(t);
                 if (sites.empty()) return std::nullopt;
                 const auto& t = pick(sites, rng);
                 Frame tick{Direction::kServerToClient,
                            {{"kind", "tick"}, {"seq", 0}, {"trial_id", t.id}, {"slot", "top"},
                             {"point_index", t.ticks.size() / 2 + 1}, {"price", 100.0}}};
                 fs.insert(fs.begin() + static_cast<std::ptrdiff_t>(*t.guess + 1), tick);
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kMissingSessionEnd, [](std::vector<Frame> fs, Rng&) -> std::optional<std::vector<Frame>> {
                 if (fs.empty() || !is(fs.back(), "session_end")) return std::nullopt;
                 fs.pop_back();
                 return fs;
               }});

  f.push_back({v::kScoreMismatch, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 auto end = find(fs, 0, "session_end");
                 if (!end) return std::nullopt;
                 auto& score = fs[*end].body["score"];
                 const auto s = score.get<std::uint64_t>();
                 score = s == 0 || chartduel::coin_flip(rng) ? s + 1 : s - 1;
                 return fs;
               }});

  f.push_back({v::kFeedbackInconsistent, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<std::size_t> sites;
                 for (const auto& t : trials(fs))
                   if (t.feedback) sites.push_back(*t.feedback);
                 if (sites.empty()) return std::nullopt;
                 auto& o = fs[pick(sites, rng)].body["outcome"];
                 o = o == "correct" ? "incorrect" : "correct";
                 return fs;
               }});

  f.push_back({v::kTrialNotEnded, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 auto ts = trials(fs);
                 if (ts.empty()) return std::nullopt;
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(pick(ts, rng).end));
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kMalformed, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 if (fs.empty()) return std::nullopt;
                 fs[chartduel::uniform_below(rng, fs.size())].body["bogus_field"] = 1;
                 return fs;
               }});

  f.push_back({v::kState, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 // A second hello anywhere after the first.
                 if (fs.size() < 3) return std::nullopt;
                 const auto at = 1 + chartduel::uniform_below(rng, fs.size() - 1);
                 fs.insert(fs.begin() + static_cast<std::ptrdiff_t>(at),
                           Frame{Direction::kClientToServer,
                                 {{"kind", "hello"}, {"seq", 0}, {"subject_id", "again"}}});
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kIncompleteTicks, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 // Drop the final tick pair of a timed-out trial.
                 std::vector<TrialSpan> sites;
                 for (auto& t : trials(fs))
                   if (t.outcome == "timeout" && t.ticks.size() >= 2) sites.push_back(t);
                 if (sites.empty()) return std::nullopt;
                 const auto& t = pick(sites, rng);
                 const auto last = t.ticks.back();
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(last));
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(last - 1));
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kMissingFeedback, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 // Only trials that scored nothing, so the running score is unaffected.
                 std::vector<std::size_t> sites;
                 for (const auto& t : trials(fs))
                   if (t.feedback && t.outcome == "incorrect") sites.push_back(*t.feedback);
                 if (sites.empty()) return std::nullopt;
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(pick(sites, rng)));
                 renumber(fs);
                 return fs;
               }});

  f.push_back({v::kPlanIncomplete, [](std::vector<Frame> fs, Rng& rng) -> std::optional<std::vector<Frame>> {
                 std::vector<TrialSpan> sites;
                 for (auto& t : trials(fs))
                   if (t.outcome != "correct") sites.push_back(t);
                 if (sites.empty()) return std::nullopt;
                 const auto& t = pick(sites, rng);
                 fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(t.start),
                          fs.begin() + static_cast<std::ptrdiff_t>(t.end + 1));
                 renumber(fs);
                 return fs;
               }});

  return f;
}

// Clean transcripts from real protocol sessions: coin bots guessing at varied
// points, some abstaining so trials time out.
inline std::vector<Transcript> corpus(std::uint64_t seed, std::size_t simulations = 4) {
  std::vector<Transcript> out;
  for (std::size_t k = 0; k < simulations; ++k) {
    chartduel::sim::SimulationSpec spec;
    spec.contest.contest_id = "fuzz" + std::to_string(k);
    spec.contest.dataset_codename = "Fuzz";
    spec.contest.mode = k % 2 ? chartduel::engine::Mode::kTick : chartduel::engine::Mode::kDaily;
    spec.contest.points_per_chart = 6;
    spec.contest.points_per_screen = 3;
    spec.contest.charts_per_subject = 8;
    spec.contest.tick_interval = std::chrono::milliseconds(100);
    spec.contest.seed = seed + k;
    spec.scoring = chartduel::synthetic::generate("iid", 6 * 8 * 30, seed + k);
    spec.sessions = 20;
    spec.seed = seed * 31 + k;
    spec.coin_guess_point = static_cast<std::uint32_t>(k % 4);
    spec.abstain_rate = 0.3;
    spec.record_wire = true;
    auto outcome = chartduel::sim::simulate_contest(spec);
    for (auto& t : outcome.transcripts) out.push_back(std::move(t));
  }
  return out;
}

// Picks a fault type and a transcript it applies to.
inline Injected inject_one(const std::vector<Transcript>& base, const std::vector<FaultType>& types,
                           std::size_t type_index, Rng& rng) {
  const auto& type = types[type_index % types.size()];
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto& t = pick(base, rng);
    if (auto fs = type.inject(unpack(t), rng)) return {pack(*fs), type.code};
  }
  throw std::runtime_error(std::string("no transcript accepts fault ") + type.code);
}

}  // namespace fuzz
