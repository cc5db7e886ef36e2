#include "chartduel/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "chartduel/errors.hpp"

namespace chartduel::engine {

namespace {

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

// Seed streams inside a contest. Distinct tags keep them from colliding.
constexpr std::uint64_t kPermutationStream = 0x7065726d75746521ULL;
constexpr std::uint64_t kSessionStream = 0x73657373696f6e21ULL;

}  // namespace

std::string to_string(Mode m) { return m == Mode::kTick ? "tick" : "daily"; }
std::string to_string(Slot s) { return s == Slot::kTop ? "top" : "bottom"; }
std::string to_string(Placement p) {
  return p == Placement::kRealOnTop ? "real_on_top" : "real_on_bottom";
}
std::string to_string(Choice c) {
  switch (c) {
    case Choice::kTop:
      return "top";
    case Choice::kBottom:
      return "bottom";
    case Choice::kTimeout:
      return "timeout";
  }
  return "timeout";
}
std::string to_string(Outcome o) { return o == Outcome::kCorrect ? "correct" : "incorrect"; }
std::string to_string(TrialState s) {
  switch (s) {
    case TrialState::kPending:
      return "pending";
    case TrialState::kStreaming:
      return "streaming";
    case TrialState::kAwaitingGuess:
      return "awaiting_guess";
    case TrialState::kResolvedCorrect:
      return "resolved_correct";
    case TrialState::kResolvedIncorrect:
      return "resolved_incorrect";
    case TrialState::kResolvedTimeout:
      return "resolved_timeout";
  }
  return "pending";
}

Mode mode_from_string(const std::string& s) {
  return parse_enum<Mode>(s, {{"tick", Mode::kTick}, {"daily", Mode::kDaily}}, "mode");
}
Slot slot_from_string(const std::string& s) {
  return parse_enum<Slot>(s, {{"top", Slot::kTop}, {"bottom", Slot::kBottom}}, "slot");
}
Placement placement_from_string(const std::string& s) {
  return parse_enum<Placement>(
      s, {{"real_on_top", Placement::kRealOnTop}, {"real_on_bottom", Placement::kRealOnBottom}},
      "placement");
}
Choice choice_from_string(const std::string& s) {
  return parse_enum<Choice>(
      s, {{"top", Choice::kTop}, {"bottom", Choice::kBottom}, {"timeout", Choice::kTimeout}},
      "choice");
}
Outcome outcome_from_string(const std::string& s) {
  return parse_enum<Outcome>(s, {{"correct", Outcome::kCorrect}, {"incorrect", Outcome::kIncorrect}},
                             "outcome");
}

std::chrono::milliseconds ContestConfig::effective_deadline() const {
  if (guess_deadline) return *guess_deadline;
  return tick_interval * points_per_chart + kDeadlineGrace;
}

series::ChartWindow ContestConfig::window() const {
  return {points_per_chart, points_per_screen, tick_interval};
}

void ContestConfig::validate() const {
  if (contest_id.empty()) throw std::invalid_argument("contest_id is empty");
  window().validate();
  if (points_per_chart < 2) {
    throw std::invalid_argument("points_per_chart must be >= 2 (one return cannot be permuted)");
  }
  if (charts_per_subject < 1) throw std::invalid_argument("charts_per_subject must be >= 1");
  if (guess_deadline && guess_deadline->count() <= 0) {
    throw std::invalid_argument("guess_deadline must be positive");
  }
  if (end_ms < start_ms) throw std::invalid_argument("contest ends before it starts");
}

Engine::Engine(EventSink sink) : sink_(std::move(sink)) {}

std::string Engine::create_contest(const ContestConfig& config,
                                   const series::ReturnSequence& scoring,
                                   std::optional<series::ReturnSequence> practice) {
  config.validate();
  if (series::is_degenerate(scoring.returns)) {
    throw std::invalid_argument("dataset returns are all identical; trials would be undecidable");
  }
  Contest c;
  c.config = config;
  c.scoring = scoring;
  if (practice && practice->size() >= config.points_per_chart &&
      !series::is_degenerate(practice->returns)) {
    c.practice = std::move(practice);
  }

  const std::size_t ppc = config.points_per_chart;
  if (config.mode == Mode::kTick) {
    // Walk whole chunks in order, skipping undecidable ones; every plan is a
    // run of charts_per_subject chunks, so plans never share an index.
    std::vector<series::ReturnSequence> chunk_run;
    const std::size_t chunks = scoring.size() / ppc;
    double base = scoring.base_price;
    for (std::size_t k = 0; k < chunks; ++k) {
      series::ReturnSequence chunk;
      const auto first = scoring.returns.begin() + static_cast<std::ptrdiff_t>(k * ppc);
      chunk.returns.assign(first, first + static_cast<std::ptrdiff_t>(ppc));
      chunk.base_price = base;
      chunk.origin_index = scoring.origin_index + k * ppc;
      for (double r : chunk.returns) base += r;
      if (series::is_degenerate(chunk.returns)) continue;
      chunk_run.push_back(std::move(chunk));
      if (chunk_run.size() == config.charts_per_subject) {
        c.pool.push_back(std::move(chunk_run));
        chunk_run.clear();
      }
    }
    if (c.pool.empty()) {
      throw CapacityError("dataset of " + std::to_string(scoring.size()) +
                              " returns cannot fill one plan of " +
                              std::to_string(config.charts_per_subject) + " x " +
                              std::to_string(ppc) + " points",
                          0);
    }
  } else if (scoring.size() < ppc) {
    throw CapacityError("daily dataset shorter than points_per_chart", 0);
  }

  std::lock_guard lock(mutex_);
  if (contests_.count(config.contest_id)) {
    throw std::invalid_argument("contest '" + config.contest_id + "' already exists");
  }
  contests_.emplace(config.contest_id, std::move(c));
  return config.contest_id;
}

ContestInfo Engine::info_locked(const Contest& c) const {
  ContestInfo info;
  info.contest_id = c.config.contest_id;
  info.codename = c.config.dataset_codename;
  info.mode = c.config.mode;
  info.points_per_chart = c.config.points_per_chart;
  info.points_per_screen = c.config.points_per_screen;
  info.charts_per_subject = c.config.charts_per_subject;
  info.tick_interval_ms = c.config.tick_interval.count();
  info.guess_deadline_ms = c.config.effective_deadline().count();
  info.practice_available = c.practice.has_value();
  return info;
}

std::vector<ContestInfo> Engine::contests() const {
  std::lock_guard lock(mutex_);
  std::vector<ContestInfo> out;
  for (const auto& [id, c] : contests_) out.push_back(info_locked(c));
  return out;
}

ContestInfo Engine::contest_info(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  return info_locked(contest_locked(contest_id));
}

std::optional<std::size_t> Engine::plans_remaining(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  const auto& c = contest_locked(contest_id);
  if (c.config.mode != Mode::kTick) return std::nullopt;
  return c.pool.size() - c.next_plan;
}

std::size_t Engine::plan_capacity(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  return contest_locked(contest_id).pool.size();
}

std::vector<series::ReturnSequence> Engine::rotated_windows(const series::ReturnSequence& data,
                                                            std::size_t count, std::size_t length,
                                                            SplitMix64& rng,
                                                            std::size_t& rotation) const {
  rotation = static_cast<std::size_t>(uniform_below(rng, data.size()));
  const auto rotated = series::rotate(data, rotation);
  std::vector<series::ReturnSequence> out;
  out.reserve(count);
  std::size_t start = 0;
  for (std::size_t k = 0; k < count; ++k) {
    auto window = series::circular_window(rotated, start, length);
    // The data as a whole is not degenerate, so some start within one lap
    // yields a decidable window.
    for (std::size_t step = 0; series::is_degenerate(window.returns) && step < data.size();
         ++step) {
      ++start;
      window = series::circular_window(rotated, start, length);
    }
    out.push_back(std::move(window));
    start += length;
  }
  return out;
}

std::string Engine::start_session(const std::string& subject_id, const std::string& contest_id,
                                  bool practice, TimestampMs now, stats::Profession profession) {
  std::lock_guard lock(mutex_);
  auto& c = contest_locked(contest_id);
  if (now < c.config.start_ms || now > c.config.end_ms) {
    throw StateError("contest '" + contest_id + "' is not open");
  }
  if (!practice) {
    for (const auto& sid : c.sessions) {
      const auto& other = sessions_.at(sid);
      if (!other.practice && other.subject_id == subject_id) {
        throw StateError("subject '" + subject_id + "' already has a scored session in '" +
                         contest_id + "'");
      }
    }
  }

  const std::size_t ppc = c.config.points_per_chart;
  const std::size_t charts = c.config.charts_per_subject;
  const std::uint64_t session_number = c.session_counter;
  SplitMix64 rng(derive_seed(c.config.seed ^ kSessionStream, session_number));

  Session s;
  s.subject_id = subject_id;
  s.contest_id = contest_id;
  s.practice = practice;
  s.profession = profession;

  std::vector<series::ReturnSequence> segments;
  if (practice) {
    if (!c.practice) throw StateError("contest '" + contest_id + "' has no practice data");
    segments = rotated_windows(*c.practice, charts, ppc, rng, s.rotation);
  } else if (c.config.mode == Mode::kTick) {
    if (c.next_plan >= c.pool.size()) throw StateError("contest '" + contest_id + "' is full");
    s.plan_index = c.next_plan;
    segments = c.pool[c.next_plan];
  } else {
    segments = rotated_windows(c.scoring, charts, ppc, rng, s.rotation);
  }

  s.session_id = contest_id + "-s" + std::to_string(session_number);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const std::uint64_t perm_seed =
        derive_seed(c.config.seed ^ kPermutationStream, c.trial_counter + k);
    auto perm = series::sample_permutation(segments[k].size(), perm_seed);
    Trial t{
        .trial_id = s.session_id + "-t" + std::to_string(k),
        .real_segment = series::PricePath(segments[k].prices(), segments[k].origin_index),
        .real_returns = segments[k],
        .surrogate_segment = series::build_surrogate(segments[k], perm),
        .placement = coin_flip(rng) ? Placement::kRealOnTop : Placement::kRealOnBottom,
    };
    s.trials.push_back(std::move(t));
  }

  // Commit only after everything that can throw.
  if (!practice && c.config.mode == Mode::kTick) ++c.next_plan;
  c.trial_counter += segments.size();
  ++c.session_counter;
  c.sessions.push_back(s.session_id);
  const auto id = s.session_id;
  sessions_.emplace(id, std::move(s));
  return id;
}

TrialCharts Engine::begin_trial(const std::string& session_id, TimestampMs now) {
  std::lock_guard lock(mutex_);
  auto& s = session_locked(session_id);
  if (s.complete()) throw StateError("session '" + session_id + "' has no trials left");
  auto& t = s.trials[s.cursor];
  if (t.state != TrialState::kPending) {
    throw StateError("trial '" + t.trial_id + "' already started");
  }
  const auto& c = contest_locked(s.contest_id);
  t.state = TrialState::kStreaming;
  t.started_at = now;

  TrialCharts out;
  out.trial_id = t.trial_id;
  out.index = s.cursor;
  const auto real = t.real_segment.prices();
  std::vector<double> real_prices(real.begin(), real.end());
  if (t.placement == Placement::kRealOnTop) {
    out.top = std::move(real_prices);
    out.bottom = t.surrogate_segment.prices;
  } else {
    out.top = t.surrogate_segment.prices;
    out.bottom = std::move(real_prices);
  }
  out.window = c.config.window();
  out.guess_deadline = c.config.effective_deadline();
  return out;
}

void Engine::finish_streaming(const std::string& session_id, const std::string& trial_id) {
  std::lock_guard lock(mutex_);
  auto& s = session_locked(session_id);
  auto& t = current_trial_locked(s, trial_id);
  if (t.state != TrialState::kStreaming) {
    throw StateError("trial '" + trial_id + "' is not streaming");
  }
  t.state = TrialState::kAwaitingGuess;
}

Feedback Engine::submit_guess(const std::string& session_id, const std::string& trial_id,
                              Slot choice, TimestampMs now) {
  std::lock_guard lock(mutex_);
  auto& s = session_locked(session_id);
  auto& t = current_trial_locked(s, trial_id);
  if (t.state != TrialState::kStreaming && t.state != TrialState::kAwaitingGuess) {
    throw StateError("trial '" + trial_id + "' is not accepting guesses (" + to_string(t.state) +
                     ")");
  }
  auto& c = contest_locked(s.contest_id);
  if (now > t.started_at + c.config.effective_deadline().count()) {
    throw StateError("guess for trial '" + trial_id + "' arrived after its deadline");
  }
  Feedback fb;
  fb.trial_id = trial_id;
  fb.real_slot = real_slot(t.placement);
  fb.outcome = choice == fb.real_slot ? Outcome::kCorrect : Outcome::kIncorrect;
  resolve_locked(c, s, t, choice == Slot::kTop ? Choice::kTop : Choice::kBottom, now);
  fb.score = s.score;
  return fb;
}

void Engine::expire_trial(const std::string& session_id, const std::string& trial_id,
                          TimestampMs now) {
  std::lock_guard lock(mutex_);
  auto& s = session_locked(session_id);
  auto& t = current_trial_locked(s, trial_id);
  if (t.state != TrialState::kStreaming && t.state != TrialState::kAwaitingGuess) {
    throw StateError("trial '" + trial_id + "' cannot time out from state " + to_string(t.state));
  }
  auto& c = contest_locked(s.contest_id);
  if (now < t.started_at + c.config.effective_deadline().count()) {
    throw StateError("trial '" + trial_id + "' deadline has not elapsed");
  }
  resolve_locked(c, s, t, Choice::kTimeout, now);
}

void Engine::forfeit(const std::string& session_id, TimestampMs now) {
  std::lock_guard lock(mutex_);
  auto& s = session_locked(session_id);
  auto& c = contest_locked(s.contest_id);
  while (!s.complete()) {
    auto& t = s.trials[s.cursor];
    if (t.state == TrialState::kPending) t.started_at = now;
    resolve_locked(c, s, t, Choice::kTimeout, now);
  }
}

void Engine::resolve_locked(Contest& c, Session& s, Trial& t, Choice choice, TimestampMs now) {
  bool correct = false;
  if (choice == Choice::kTimeout) {
    t.state = TrialState::kResolvedTimeout;
  } else {
    const Slot picked = choice == Choice::kTop ? Slot::kTop : Slot::kBottom;
    correct = picked == real_slot(t.placement);
    t.state = correct ? TrialState::kResolvedCorrect : TrialState::kResolvedIncorrect;
    ++s.answered;
  }
  if (correct) ++s.score;

  GuessEvent ev;
  ev.timestamp = std::max(now, s.last_event_ts == std::numeric_limits<TimestampMs>::min()
                                   ? now
                                   : s.last_event_ts + 1);
  s.last_event_ts = ev.timestamp;
  ev.contest_id = c.config.contest_id;
  ev.session_id = s.session_id;
  ev.subject_id = s.subject_id;
  ev.trial_id = t.trial_id;
  ev.choice = choice;
  ev.outcome = correct ? Outcome::kCorrect : Outcome::kIncorrect;
  ev.placement = t.placement;
  ev.practice = s.practice;
  ev.profession = s.profession;

  ++s.cursor;
  if (s.complete()) s.completed_at = ev.timestamp;
  if (sink_) sink_(ev);
}

std::vector<LeaderboardEntry> Engine::leaderboard(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  const auto& c = contest_locked(contest_id);
  std::vector<LeaderboardEntry> out;
  for (const auto& sid : c.sessions) {
    const auto& s = sessions_.at(sid);
    if (s.practice || !s.completed_at) continue;
    out.push_back({s.subject_id, s.score, *s.completed_at});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.completed_at != b.completed_at) return a.completed_at < b.completed_at;
    return a.subject_id < b.subject_id;
  });
  return out;
}

std::vector<stats::SubjectRecord> Engine::subject_records(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  const auto& c = contest_locked(contest_id);
  std::vector<stats::SubjectRecord> out;
  for (const auto& sid : c.sessions) {
    const auto& s = sessions_.at(sid);
    if (s.practice || !s.completed_at) continue;
    out.push_back({s.subject_id, s.profession, s.score, s.answered,
                   static_cast<std::int64_t>(s.trials.size())});
  }
  return out;
}

LiveResult Engine::live_result(const std::string& contest_id, double min_response_rate) const {
  LiveResult out;
  out.records = subject_records(contest_id);
  auto filtered = stats::apply_response_filter(out.records, min_response_rate);
  out.excluded = std::move(filtered.excluded);
  if (!filtered.kept.empty()) {
    std::int64_t charts = 0;
    {
      std::lock_guard lock(mutex_);
      charts = contest_locked(contest_id).config.charts_per_subject;
    }
    out.result = stats::summarize_contest(filtered.kept, charts);
    out.result->contest_id = contest_id;
  }
  return out;
}

Session Engine::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return session_locked(session_id);
}

std::vector<std::string> Engine::session_ids(const std::string& contest_id) const {
  std::lock_guard lock(mutex_);
  return contest_locked(contest_id).sessions;
}

TimestampMs Engine::trial_deadline(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto& s = session_locked(session_id);
  if (s.complete()) throw StateError("session '" + session_id + "' is complete");
  const auto& c = contest_locked(s.contest_id);
  return s.trials[s.cursor].started_at + c.config.effective_deadline().count();
}

Engine::Contest& Engine::contest_locked(const std::string& id) {
  auto it = contests_.find(id);
  if (it == contests_.end()) throw StateError("unknown contest '" + id + "'");
  return it->second;
}

const Engine::Contest& Engine::contest_locked(const std::string& id) const {
  auto it = contests_.find(id);
  if (it == contests_.end()) throw StateError("unknown contest '" + id + "'");
  return it->second;
}

Session& Engine::session_locked(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw StateError("unknown session '" + id + "'");
  return it->second;
}

const Session& Engine::session_locked(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw StateError("unknown session '" + id + "'");
  return it->second;
}

Trial& Engine::current_trial_locked(Session& s, const std::string& trial_id) {
  auto it = std::find_if(s.trials.begin(), s.trials.end(),
                         [&](const Trial& t) { return t.trial_id == trial_id; });
  if (it == s.trials.end()) throw StateError("unknown trial '" + trial_id + "'");
  if (is_resolved(it->state)) throw StateError("trial '" + trial_id + "' is already resolved");
  if (static_cast<std::size_t>(it - s.trials.begin()) != s.cursor) {
    throw StateError("trial '" + trial_id + "' is not the current trial");
  }
  return *it;
}

}  // namespace chartduel::engine
