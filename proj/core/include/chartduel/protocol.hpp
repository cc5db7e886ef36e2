#pragma once

// Wire protocol between the stream server and its clients (browser UI or
// bots). Every frame is one JSON object on its own line:
//
//   {"kind": "<kind>", "seq": <n>, ...kind-specific fields}
//
// `seq` increases strictly per session and per direction. The field set of
// each kind is fixed (see docs/protocol.schema.json); nothing sent before a
// trial's feedback carries the placement of the real chart.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace chartduel::protocol {

enum class Kind {
  kHello,
  kContestList,
  kSessionOpen,
  kTrialStart,
  kTick,
  kGuess,
  kFeedback,
  kTrialEnd,
  kSessionEnd,
  kError,
};

inline constexpr Kind kAllKinds[] = {Kind::kHello,      Kind::kContestList, Kind::kSessionOpen,
                                     Kind::kTrialStart, Kind::kTick,        Kind::kGuess,
                                     Kind::kFeedback,   Kind::kTrialEnd,    Kind::kSessionEnd,
                                     Kind::kError};

enum class Direction { kClientToServer, kServerToClient };

std::string to_string(Kind k);
std::optional<Kind> kind_from_string(std::string_view s);
std::string to_string(Direction d);

struct Message {
  Kind kind = Kind::kError;
  std::uint64_t seq = 0;
  nlohmann::json body = nlohmann::json::object();  // fields other than kind/seq
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serializes to a single line without the trailing newline.
std::string encode(const Message& m);
/// Parses and checks the frame against the schema for `dir`. Throws
/// ProtocolError on invalid JSON, unknown kind, wrong direction, missing or
/// unexpected fields, or wrongly typed values.
Message decode(std::string_view frame, Direction dir);

/// Whether `kind` may travel in `dir`.
bool allowed_direction(Kind kind, Direction dir);
/// Field names (besides kind and seq) a frame of `kind` travelling in `dir`
/// carries. Optional fields are included.
const std::set<std::string>& fields(Kind kind, Direction dir);
const std::set<std::string>& optional_fields(Kind kind, Direction dir);

/// Kinds that may be sent while a trial's outcome is still hidden.
bool is_pre_feedback(Kind kind);
/// Field names that would reveal which chart is real.
const std::set<std::string>& truth_fields();

// Error codes carried by `error` frames.
inline constexpr std::string_view kErrMalformed = "malformed";
inline constexpr std::string_view kErrState = "unexpected_message";
inline constexpr std::string_view kErrRejected = "rejected";

}  // namespace chartduel::protocol
