#include "chartduel/protocol.hpp"

#include <array>
#include <map>
#include <utility>

namespace chartduel::protocol {

namespace {

using json = nlohmann::json;

enum class Type { kString, kUint, kInt, kNumber, kBool, kArray, kSlot, kChoice, kOutcome, kEnd };

struct FieldSpec {
  const char* name;
  Type type;
  bool optional = false;
};

struct KindSpec {
  Kind kind;
  Direction dir;
  std::vector<FieldSpec> fields;
};

const std::vector<KindSpec>& schema() {
  static const std::vector<KindSpec> table = {
      {Kind::kHello, Direction::kClientToServer,
       {{"subject_id", Type::kString}, {"profession", Type::kString, true}}},
      {Kind::kContestList, Direction::kServerToClient, {{"contests", Type::kArray}}},
      {Kind::kSessionOpen, Direction::kClientToServer,
       {{"contest_id", Type::kString}, {"practice", Type::kBool, true}}},
      {Kind::kSessionOpen, Direction::kServerToClient,
       {{"session_id", Type::kString},
        {"contest_id", Type::kString},
        {"practice", Type::kBool},
        {"charts", Type::kUint}}},
      {Kind::kTrialStart, Direction::kServerToClient,
       {{"trial_id", Type::kString},
        {"index", Type::kUint},
        {"points_per_chart", Type::kUint},
        {"points_per_screen", Type::kUint},
        {"tick_interval_ms", Type::kUint},
        {"guess_deadline_ms", Type::kUint},
        {"base_price", Type::kNumber}}},
      {Kind::kTick, Direction::kServerToClient,
       {{"trial_id", Type::kString},
        {"slot", Type::kSlot},
        {"point_index", Type::kUint},
        {"price", Type::kNumber}}},
      {Kind::kGuess, Direction::kClientToServer,
       {{"trial_id", Type::kString}, {"choice", Type::kSlot}}},
      {Kind::kFeedback, Direction::kServerToClient,
       {{"trial_id", Type::kString},
        {"outcome", Type::kOutcome},
        {"real_slot", Type::kSlot},
        {"score", Type::kUint}}},
      {Kind::kTrialEnd, Direction::kServerToClient,
       {{"trial_id", Type::kString}, {"outcome", Type::kEnd}}},
      {Kind::kSessionEnd, Direction::kServerToClient,
       {{"session_id", Type::kString},
        {"score", Type::kUint},
        {"answered", Type::kUint},
        {"assigned", Type::kUint}}},
      {Kind::kError, Direction::kServerToClient,
       {{"code", Type::kString}, {"message", Type::kString}, {"fatal", Type::kBool}}},
  };
  return table;
}

const KindSpec* find_spec(Kind kind, Direction dir) {
  for (const auto& s : schema()) {
    if (s.kind == kind && s.dir == dir) return &s;
  }
  return nullptr;
}

constexpr std::array<std::pair<Kind, const char*>, 10> kNames = {{
    {Kind::kHello, "hello"},
    {Kind::kContestList, "contest_list"},
    {Kind::kSessionOpen, "session_open"},
    {Kind::kTrialStart, "trial_start"},
    {Kind::kTick, "tick"},
    {Kind::kGuess, "guess"},
    {Kind::kFeedback, "feedback"},
    {Kind::kTrialEnd, "trial_end"},
    {Kind::kSessionEnd, "session_end"},
    {Kind::kError, "error"},
}};

bool type_ok(const json& v, Type t) {
  switch (t) {
    case Type::kString:
      return v.is_string();
    case Type::kUint:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case Type::kInt:
      return v.is_number_integer();
    case Type::kNumber:
      return v.is_number();
    case Type::kBool:
      return v.is_boolean();
    case Type::kArray:
      return v.is_array();
    case Type::kSlot:
    case Type::kChoice:
      return v.is_string() && (v == "top" || v == "bottom");
    case Type::kOutcome:
      return v.is_string() && (v == "correct" || v == "incorrect");
    case Type::kEnd:
      return v.is_string() && (v == "correct" || v == "incorrect" || v == "timeout");
  }
  return false;
}

}  // namespace

std::string to_string(Kind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "error";
}

std::optional<Kind> kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

std::string to_string(Direction d) {
  return d == Direction::kClientToServer ? "c2s" : "s2c";
}

bool allowed_direction(Kind kind, Direction dir) { return find_spec(kind, dir) != nullptr; }

const std::set<std::string>& fields(Kind kind, Direction dir) {
  static const auto cache = [] {
    std::map<std::pair<Kind, Direction>, std::set<std::string>> m;
    for (const auto& s : schema()) {
      auto& f = m[{s.kind, s.dir}];
      for (const auto& field : s.fields) f.insert(field.name);
    }
    return m;
  }();
  static const std::set<std::string> empty;
  auto it = cache.find({kind, dir});
  return it == cache.end() ? empty : it->second;
}

const std::set<std::string>& optional_fields(Kind kind, Direction dir) {
  static const auto cache = [] {
    std::map<std::pair<Kind, Direction>, std::set<std::string>> m;
    for (const auto& s : schema()) {
      auto& f = m[{s.kind, s.dir}];
      for (const auto& field : s.fields) {
        if (field.optional) f.insert(field.name);
      }
    }
    return m;
  }();
  static const std::set<std::string> empty;
  auto it = cache.find({kind, dir});
  return it == cache.end() ? empty : it->second;
}

bool is_pre_feedback(Kind kind) {
  return kind != Kind::kFeedback && kind != Kind::kTrialEnd && kind != Kind::kSessionEnd;
}

const std::set<std::string>& truth_fields() {
  static const std::set<std::string> names = {"placement", "real_slot", "real", "is_real",
                                              "truth", "correct_slot", "answer"};
  return names;
}

std::string encode(const Message& m) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(m.kind);
  j["seq"] = m.seq;
  for (const auto& [key, value] : m.body.items()) j[key] = value;
  return j.dump();
}

Message decode(std::string_view frame, Direction dir) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("frame is not a JSON object");
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) throw ProtocolError("missing kind");
  const auto kind = kind_from_string(kind_it->get<std::string>());
  if (!kind) throw ProtocolError("unknown kind '" + kind_it->get<std::string>() + "'");
  const auto* spec = find_spec(*kind, dir);
  if (!spec) {
    throw ProtocolError("kind '" + to_string(*kind) + "' not allowed " + to_string(dir));
  }
  auto seq_it = j.find("seq");
  if (seq_it == j.end() || !type_ok(*seq_it, Type::kUint)) throw ProtocolError("missing seq");

  Message m;
  m.kind = *kind;
  m.seq = seq_it->get<std::uint64_t>();
  for (const auto& f : spec->fields) {
    auto it = j.find(f.name);
    if (it == j.end()) {
      if (f.optional) continue;
      throw ProtocolError(to_string(*kind) + ": missing field '" + f.name + "'");
    }
    if (!type_ok(*it, f.type)) {
      throw ProtocolError(to_string(*kind) + ": bad value for '" + f.name + "'");
    }
    m.body[f.name] = *it;
  }
  if (m.body.size() + 2 != j.size()) {
    for (const auto& [key, value] : j.items()) {
      if (key != "kind" && key != "seq" && !m.body.contains(key)) {
        throw ProtocolError(to_string(*kind) + ": unexpected field '" + key + "'");
      }
    }
  }
  return m;
}

}  // namespace chartduel::protocol
