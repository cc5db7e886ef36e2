#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chartduel/protocol.hpp"

namespace chartduel::protocol {

struct TranscriptEntry {
  Direction dir = Direction::kServerToClient;
  std::string frame;
};

/// Every frame of one session, both directions, in the order the server
/// observed them.
using Transcript = std::vector<TranscriptEntry>;

// Violation codes reported by validate_transcript.
namespace violation {
inline constexpr const char* kMalformed = "malformed";
inline constexpr const char* kSequence = "sequence";
inline constexpr const char* kState = "state";
inline constexpr const char* kLeak = "leak";
inline constexpr const char* kUnpairedTick = "unpaired_tick";
inline constexpr const char* kTickAfterGuess = "tick_after_guess";
inline constexpr const char* kIncompleteTicks = "incomplete_ticks";
inline constexpr const char* kFeedbackWithoutGuess = "feedback_without_guess";
inline constexpr const char* kDuplicateGuess = "duplicate_guess";
inline constexpr const char* kMissingFeedback = "missing_feedback";
inline constexpr const char* kFeedbackInconsistent = "feedback_inconsistent";
inline constexpr const char* kTrialNotEnded = "trial_not_ended";
inline constexpr const char* kPlanIncomplete = "plan_incomplete";
inline constexpr const char* kScoreMismatch = "score_mismatch";
inline constexpr const char* kMissingSessionEnd = "missing_session_end";
}  // namespace violation

struct Violation {
  std::size_t index = 0;  // entry index in the transcript
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks state-machine legality, per-direction seq monotonicity, tick pairing
/// and the no-leak rule. After a violation the checker resynchronises so that
/// one fault yields one report. Never throws on bad input.
ValidationReport validate_transcript(const Transcript& transcript);

/// One `{"dir": "c2s"|"s2c", "frame": {...}}` object per line, as written by
/// the serve command's transcript option.
std::string encode_transcript_line(const TranscriptEntry& entry, const std::string& connection);

}  // namespace chartduel::protocol
