#pragma once

// Contest and session state machine.
//
// A contest owns a blinded dataset and hands out trial plans. In tick mode
// every scored session takes its own plan from a pool of index-disjoint
// segments (first come, first served; an exhausted pool rejects newcomers).
// In daily mode every session sees the same returns, circularly rotated by a
// per-session random offset. Practice sessions run on a reserved slice and
// never reach the aggregate.
//
// Each trial pairs a real segment with a freshly permuted surrogate and
// places the real chart on top or bottom by a server-side coin flip. Trials
// progress pending -> streaming -> awaiting-guess -> resolved, forward only.
// A missing guess resolves as a timeout and counts as incorrect.

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chartduel/random.hpp"
#include "chartduel/series.hpp"
#include "chartduel/stats.hpp"

namespace chartduel::engine {

using TimestampMs = std::int64_t;  // UTC milliseconds since epoch (or virtual)

enum class Mode { kTick, kDaily };
enum class Slot { kTop, kBottom };
enum class Placement { kRealOnTop, kRealOnBottom };
enum class Choice { kTop, kBottom, kTimeout };
enum class Outcome { kCorrect, kIncorrect };
enum class TrialState {
  kPending,
  kStreaming,
  kAwaitingGuess,
  kResolvedCorrect,
  kResolvedIncorrect,
  kResolvedTimeout,
};

std::string to_string(Mode m);
std::string to_string(Slot s);
std::string to_string(Placement p);
std::string to_string(Choice c);
std::string to_string(Outcome o);
std::string to_string(TrialState s);
Mode mode_from_string(const std::string& s);
Slot slot_from_string(const std::string& s);
Placement placement_from_string(const std::string& s);
Choice choice_from_string(const std::string& s);
Outcome outcome_from_string(const std::string& s);

inline Slot real_slot(Placement p) { return p == Placement::kRealOnTop ? Slot::kTop : Slot::kBottom; }
inline bool is_resolved(TrialState s) {
  return s == TrialState::kResolvedCorrect || s == TrialState::kResolvedIncorrect ||
         s == TrialState::kResolvedTimeout;
}

struct ContestConfig {
  std::string contest_id;
  std::string dataset_codename;
  Mode mode = Mode::kDaily;
  std::uint32_t points_per_chart = 80;
  std::uint32_t points_per_screen = 40;
  std::uint32_t charts_per_subject = 35;
  std::chrono::milliseconds tick_interval{1000};
  std::optional<std::chrono::milliseconds> guess_deadline;
  TimestampMs start_ms = 0;
  TimestampMs end_ms = std::numeric_limits<TimestampMs>::max();
  std::string prize_note;
  std::uint64_t seed = 0;

  /// points_per_chart * tick_interval + 10 s unless overridden.
  std::chrono::milliseconds effective_deadline() const;
  series::ChartWindow window() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

inline constexpr std::chrono::milliseconds kDeadlineGrace{10'000};

/// Immutable record of one resolved trial. `placement` is for audit only and
/// never leaves the server before the trial resolves.
struct GuessEvent {
  TimestampMs timestamp = 0;
  std::string contest_id;
  std::string session_id;
  std::string subject_id;
  std::string trial_id;
  Choice choice = Choice::kTimeout;
  Outcome outcome = Outcome::kIncorrect;
  Placement placement = Placement::kRealOnTop;
  bool practice = false;
  stats::Profession profession = stats::Profession::kUndeclared;

  bool operator==(const GuessEvent&) const = default;
};

using EventSink = std::function<void(const GuessEvent&)>;

struct Trial {
  std::string trial_id;
  series::PricePath real_segment;
  series::ReturnSequence real_returns;
  series::SurrogatePath surrogate_segment;
  Placement placement = Placement::kRealOnTop;
  TrialState state = TrialState::kPending;
  TimestampMs started_at = 0;
};

/// What the streaming layer needs to draw one trial: both charts already
/// placed, no truth label.
struct TrialCharts {
  std::string trial_id;
  std::size_t index = 0;
  std::vector<double> top;
  std::vector<double> bottom;
  series::ChartWindow window;
  std::chrono::milliseconds guess_deadline{0};
};

struct Feedback {
  std::string trial_id;
  Outcome outcome = Outcome::kIncorrect;
  Slot real_slot = Slot::kTop;
  std::int64_t score = 0;
};

struct Session {
  std::string session_id;
  std::string subject_id;
  std::string contest_id;
  bool practice = false;
  stats::Profession profession = stats::Profession::kUndeclared;
  std::vector<Trial> trials;
  std::size_t cursor = 0;
  std::int64_t score = 0;
  std::int64_t answered = 0;
  std::optional<TimestampMs> completed_at;
  /// Tick mode: index of the pool plan taken. Daily/practice: rotation offset.
  std::size_t plan_index = 0;
  std::size_t rotation = 0;
  TimestampMs last_event_ts = std::numeric_limits<TimestampMs>::min();

  bool complete() const { return cursor >= trials.size(); }
};

struct LeaderboardEntry {
  std::string subject_id;
  std::int64_t score = 0;
  TimestampMs completed_at = 0;
};

/// Public, blinded view of a contest.
struct ContestInfo {
  std::string contest_id;
  std::string codename;
  Mode mode = Mode::kDaily;
  std::uint32_t points_per_chart = 0;
  std::uint32_t points_per_screen = 0;
  std::uint32_t charts_per_subject = 0;
  std::int64_t tick_interval_ms = 0;
  std::int64_t guess_deadline_ms = 0;
  bool practice_available = false;
};

struct LiveResult {
  std::optional<stats::ContestResult> result;  // empty when no subject remains
  std::vector<stats::Exclusion> excluded;
  std::vector<stats::SubjectRecord> records;
};

class Engine {
 public:
  explicit Engine(EventSink sink = {});

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Registers a contest over `scoring` returns, with an optional reserved
  /// practice slice. Throws CapacityError when tick mode cannot fill a single
  /// plan, std::invalid_argument for degenerate data or a bad config.
  std::string create_contest(const ContestConfig& config, const series::ReturnSequence& scoring,
                             std::optional<series::ReturnSequence> practice = std::nullopt);

  std::vector<ContestInfo> contests() const;
  ContestInfo contest_info(const std::string& contest_id) const;
  /// Remaining unclaimed plans in tick mode; nullopt for daily mode.
  std::optional<std::size_t> plans_remaining(const std::string& contest_id) const;
  std::size_t plan_capacity(const std::string& contest_id) const;

  /// Builds a full trial plan. Throws StateError when the contest is closed,
  /// full, or the subject already holds a scored session in it.
  std::string start_session(const std::string& subject_id, const std::string& contest_id,
                            bool practice, TimestampMs now,
                            stats::Profession profession = stats::Profession::kUndeclared);

  /// Moves the current trial from pending to streaming and returns its charts.
  TrialCharts begin_trial(const std::string& session_id, TimestampMs now);
  /// All points sent; the trial now only waits for a guess or its deadline.
  void finish_streaming(const std::string& session_id, const std::string& trial_id);

  /// Accepted while the trial streams or awaits a guess, before its deadline.
  /// Rejections throw StateError and leave the session untouched.
  Feedback submit_guess(const std::string& session_id, const std::string& trial_id, Slot choice,
                        TimestampMs now);
  /// Resolves the trial as a timeout; rejected before the deadline.
  void expire_trial(const std::string& session_id, const std::string& trial_id, TimestampMs now);
  /// Disconnect: every unresolved trial resolves as a timeout immediately.
  void forfeit(const std::string& session_id, TimestampMs now);

  std::vector<LeaderboardEntry> leaderboard(const std::string& contest_id) const;
  /// Records of completed scored sessions, in session creation order.
  std::vector<stats::SubjectRecord> subject_records(const std::string& contest_id) const;
  LiveResult live_result(const std::string& contest_id,
                         double min_response_rate = stats::kDefaultMinResponseRate) const;

  Session session(const std::string& session_id) const;
  std::vector<std::string> session_ids(const std::string& contest_id) const;
  TimestampMs trial_deadline(const std::string& session_id) const;

 private:
  struct Contest {
    ContestConfig config;
    series::ReturnSequence scoring;
    std::optional<series::ReturnSequence> practice;
    std::vector<std::vector<series::ReturnSequence>> pool;  // tick mode
    std::size_t next_plan = 0;
    std::uint64_t trial_counter = 0;
    std::uint64_t session_counter = 0;
    std::vector<std::string> sessions;
  };

  Contest& contest_locked(const std::string& id);
  const Contest& contest_locked(const std::string& id) const;
  Session& session_locked(const std::string& id);
  const Session& session_locked(const std::string& id) const;
  Trial& current_trial_locked(Session& s, const std::string& trial_id);
  void resolve_locked(Contest& c, Session& s, Trial& t, Choice choice, TimestampMs now);
  std::vector<series::ReturnSequence> rotated_windows(const series::ReturnSequence& data,
                                                      std::size_t count, std::size_t length,
                                                      SplitMix64& rng, std::size_t& rotation) const;
  ContestInfo info_locked(const Contest& c) const;

  mutable std::mutex mutex_;
  EventSink sink_;
  std::map<std::string, Contest> contests_;
  std::map<std::string, Session> sessions_;
};

}  // namespace chartduel::engine
