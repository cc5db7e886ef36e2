#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chartduel/bots.hpp"
#include "chartduel/engine.hpp"
#include "chartduel/store.hpp"
#include "chartduel/transcript.hpp"

namespace chartduel::sim {

enum class BotKind { kCoin, kLearning };
std::string to_string(BotKind k);
BotKind bot_kind_from_string(const std::string& s);

struct SimulationSpec {
  engine::ContestConfig contest;
  series::ReturnSequence scoring;
  std::optional<series::ReturnSequence> practice;
  BotKind bot = BotKind::kCoin;
  bots::Feature feature = bots::Feature::kLag1Autocorrelation;
  std::size_t sessions = 26;
  std::uint64_t seed = 0;  // bot seeds derive from this
  bool feedback = true;
  std::uint32_t coin_guess_point = 1;
  double abstain_rate = 0.0;
  bool record_wire = false;
  double min_response_rate = stats::kDefaultMinResponseRate;
  /// Also append every event here, if set.
  store::EventLog* event_log = nullptr;
};

struct SimulationOutcome {
  engine::LiveResult live;
  std::vector<engine::GuessEvent> events;
  std::vector<bots::BotRecord> bots;
  std::vector<engine::LeaderboardEntry> leaderboard;
  std::vector<protocol::Transcript> transcripts;  // per connection, when recorded
  engine::TimestampMs finished_at = 0;
};

/// Runs `sessions` bots concurrently against one contest on a virtual clock.
/// A pure function of the spec. Throws CapacityError when a tick-mode pool
/// holds fewer plans than `sessions`.
SimulationOutcome simulate_contest(const SimulationSpec& spec);

}  // namespace chartduel::sim
