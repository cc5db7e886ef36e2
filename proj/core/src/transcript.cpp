#include "chartduel/transcript.hpp"

#include <array>
#include <optional>

namespace chartduel::protocol {

namespace {

using json = nlohmann::json;

enum class Phase { kHello, kContestList, kOpenRequest, kOpenReply, kIdle, kInTrial, kEnded };

struct TrialState {
  std::string trial_id;
  std::uint64_t points_per_chart = 0;
  std::optional<std::string> guess;
  bool feedback = false;
  std::optional<bool> correct;  // truth-derived (or feedback-claimed without a guess)
  std::uint64_t top = 0;
  std::uint64_t bottom = 0;
  std::string expect_slot = "top";
  std::uint64_t expect_index = 1;
  bool pairing_broken = false;
};

class Checker {
 public:
  explicit Checker(const Transcript& t) : transcript_(t) {}

  ValidationReport run() {
    for (index_ = 0; index_ < transcript_.size(); ++index_) step(transcript_[index_]);
    if (phase_ != Phase::kEnded) flag(violation::kMissingSessionEnd, "transcript ends mid-session");
    return std::move(report_);
  }

 private:
  void flag(const char* code, std::string detail) {
    report_.violations.push_back({index_, code, std::move(detail)});
  }

  void step(const TranscriptEntry& entry) {
    json j;
    try {
      j = json::parse(entry.frame);
    } catch (const json::exception&) {
      flag(violation::kMalformed, "invalid JSON");
      return;
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
      flag(violation::kMalformed, "missing kind");
      return;
    }
    const auto kind = kind_from_string(j["kind"].get<std::string>());
    if (!kind || !allowed_direction(*kind, entry.dir)) {
      flag(violation::kMalformed, "unknown kind or wrong direction");
      return;
    }

    // Sequence numbers, per direction.
    auto& last = last_seq_[entry.dir == Direction::kClientToServer ? 0 : 1];
    if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
      flag(violation::kMalformed, "missing seq");
    } else {
      const auto seq = j["seq"].get<std::uint64_t>();
      if (last && seq <= *last) {
        flag(violation::kSequence, "seq " + std::to_string(seq) + " after " + std::to_string(*last));
      } else {
        last = seq;
      }
    }

    // Schema and no-leak audit.
    const auto& allowed = fields(*kind, entry.dir);
    bool shape_ok = true;
    for (const auto& [key, value] : j.items()) {
      if (key == "kind" || key == "seq" || allowed.count(key)) continue;
      shape_ok = false;
      if (is_pre_feedback(*kind) && truth_fields().count(key)) {
        flag(violation::kLeak, "'" + key + "' in " + to_string(*kind));
      } else {
        flag(violation::kMalformed, "unexpected field '" + key + "'");
      }
    }
    Message m;
    try {
      m = decode(entry.frame, entry.dir);
    } catch (const ProtocolError& e) {
      if (shape_ok) {
        flag(violation::kMalformed, e.what());
        return;
      }
      // Extra fields already reported; interpret the rest of the frame.
      m.kind = *kind;
      m.body = j;
      m.body.erase("kind");
      m.body.erase("seq");
      for (const auto& key : std::vector<std::string>(truth_fields().begin(), truth_fields().end())) {
        if (!allowed.count(key)) m.body.erase(key);
      }
    }
    dispatch(m);
  }

  bool in_trial(const Message& m) {
    if (phase_ != Phase::kInTrial || m.body.value("trial_id", std::string{}) != trial_.trial_id) {
      flag(violation::kState, to_string(m.kind) + " outside its trial");
      return false;
    }
    return true;
  }

  void dispatch(const Message& m) {
    if (phase_ == Phase::kEnded) {
      flag(violation::kState, to_string(m.kind) + " after the session ended");
      return;
    }
    switch (m.kind) {
      case Kind::kHello:
        expect(Phase::kHello, Phase::kContestList, m);
        break;
      case Kind::kContestList:
        expect(Phase::kContestList, Phase::kOpenRequest, m);
        break;
      case Kind::kSessionOpen:
        if (phase_ == Phase::kOpenRequest) {
          phase_ = Phase::kOpenReply;
        } else if (phase_ == Phase::kOpenReply) {
          phase_ = Phase::kIdle;
          charts_ = m.body.value("charts", std::uint64_t{0});
        } else {
          flag(violation::kState, "session_open out of order");
        }
        break;
      case Kind::kTrialStart:
        if (phase_ == Phase::kInTrial) {
          flag(violation::kTrialNotEnded, "trial " + trial_.trial_id + " never ended");
          close_trial();
        } else if (phase_ != Phase::kIdle) {
          flag(violation::kState, "trial_start before the session opened");
        }
        trial_ = TrialState{};
        trial_.trial_id = m.body.value("trial_id", std::string{});
        trial_.points_per_chart = m.body.value("points_per_chart", std::uint64_t{0});
        phase_ = Phase::kInTrial;
        break;
      case Kind::kTick:
        on_tick(m);
        break;
      case Kind::kGuess:
        if (!in_trial(m)) break;
        if (trial_.guess) {
          flag(violation::kDuplicateGuess, "second guess for " + trial_.trial_id);
          break;
        }
        if (trial_.feedback) {
          flag(violation::kState, "guess after feedback");
          break;
        }
        if (!trial_.pairing_broken && trial_.expect_slot == "bottom") {
          flag(violation::kUnpairedTick, "guess arrived with an unpaired top tick");
          trial_.pairing_broken = true;
        }
        trial_.guess = m.body.value("choice", std::string{});
        break;
      case Kind::kFeedback: {
        if (!in_trial(m)) break;
        if (trial_.feedback) {
          flag(violation::kState, "second feedback");
          break;
        }
        trial_.feedback = true;
        const bool claimed = m.body.value("outcome", std::string{}) == "correct";
        if (!trial_.guess) {
          flag(violation::kFeedbackWithoutGuess, "feedback for " + trial_.trial_id);
          trial_.correct = claimed;
          break;
        }
        trial_.correct = *trial_.guess == m.body.value("real_slot", std::string{});
        if (claimed != *trial_.correct) {
          flag(violation::kFeedbackInconsistent, "outcome disagrees with real_slot");
        }
        if (m.body.value("score", std::uint64_t{0}) != score_ + (*trial_.correct ? 1 : 0)) {
          flag(violation::kScoreMismatch, "running score disagrees with derived outcomes");
        }
        break;
      }
      case Kind::kTrialEnd: {
        if (!in_trial(m)) break;
        const auto outcome = m.body.value("outcome", std::string{});
        if (trial_.guess && !trial_.feedback) {
          flag(violation::kMissingFeedback, "guess never answered");
        } else if (!trial_.feedback) {
          if (outcome != "timeout") {
            flag(violation::kFeedbackInconsistent, "trial without a guess must end as timeout");
          }
          if (!trial_.pairing_broken) {
            if (trial_.top != trial_.bottom) {
              flag(violation::kUnpairedTick, "slot tick counts differ");
            } else if (trial_.top != trial_.points_per_chart) {
              flag(violation::kIncompleteTicks,
                   std::to_string(trial_.top) + " of " + std::to_string(trial_.points_per_chart) +
                       " points before timeout");
            }
          }
        } else if (trial_.correct && outcome != (*trial_.correct ? "correct" : "incorrect")) {
          flag(violation::kFeedbackInconsistent, "trial_end outcome disagrees with feedback");
        }
        close_trial();
        break;
      }
      case Kind::kSessionEnd:
        if (phase_ == Phase::kInTrial) {
          flag(violation::kTrialNotEnded, "session ended inside trial " + trial_.trial_id);
          close_trial();
        } else if (phase_ != Phase::kIdle) {
          flag(violation::kState, "session_end before the session opened");
        }
        if (trials_done_ != charts_) {
          flag(violation::kPlanIncomplete, std::to_string(trials_done_) + " of " +
                                               std::to_string(charts_) + " trials played");
        }
        if (m.body.value("score", std::uint64_t{0}) != score_) {
          flag(violation::kScoreMismatch, "reported " + m.body.value("score", json{}).dump() +
                                              ", derived " + std::to_string(score_));
        }
        phase_ = Phase::kEnded;
        break;
      case Kind::kError:
        if (m.body.value("fatal", false)) phase_ = Phase::kEnded;
        break;
    }
  }

  void expect(Phase want, Phase next, const Message& m) {
    if (phase_ != want) {
      flag(violation::kState, to_string(m.kind) + " out of order");
      return;
    }
    phase_ = next;
  }

  void on_tick(const Message& m) {
    if (!in_trial(m)) return;
    if (trial_.guess || trial_.feedback) {
      flag(violation::kTickAfterGuess, "tick after guess in " + trial_.trial_id);
      return;
    }
    const auto slot = m.body.value("slot", std::string{});
    const auto index = m.body.value("point_index", std::uint64_t{0});
    if (slot == "top") ++trial_.top;
    if (slot == "bottom") ++trial_.bottom;
    if (slot != trial_.expect_slot || index != trial_.expect_index ||
        index > trial_.points_per_chart) {
      if (!trial_.pairing_broken) {
        flag(violation::kUnpairedTick, slot + " tick " + std::to_string(index) + ", expected " +
                                           trial_.expect_slot + " " +
                                           std::to_string(trial_.expect_index));
      }
      trial_.pairing_broken = true;
    }
    if (slot == "top") {
      trial_.expect_slot = "bottom";
      trial_.expect_index = index;
    } else {
      trial_.expect_slot = "top";
      trial_.expect_index = index + 1;
    }
  }

  void close_trial() {
    if (trial_.correct.value_or(false)) ++score_;
    ++trials_done_;
    phase_ = Phase::kIdle;
  }

  const Transcript& transcript_;
  std::size_t index_ = 0;
  ValidationReport report_;
  Phase phase_ = Phase::kHello;
  std::array<std::optional<std::uint64_t>, 2> last_seq_{};
  TrialState trial_;
  std::uint64_t charts_ = 0;
  std::uint64_t trials_done_ = 0;
  std::uint64_t score_ = 0;
};

}  // namespace

ValidationReport validate_transcript(const Transcript& transcript) {
  return Checker(transcript).run();
}

std::string encode_transcript_line(const TranscriptEntry& entry, const std::string& connection) {
  nlohmann::ordered_json j;
  j["connection"] = connection;
  j["dir"] = to_string(entry.dir);
  try {
    j["frame"] = nlohmann::ordered_json::parse(entry.frame);
  } catch (const nlohmann::json::exception&) {
    j["frame"] = entry.frame;
  }
  return j.dump();
}

}  // namespace chartduel::protocol
