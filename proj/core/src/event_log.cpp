#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "chartduel/errors.hpp"
#include "chartduel/store.hpp"

namespace chartduel::store {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

}  // namespace

std::string encode_event(const engine::GuessEvent& e) {
  nlohmann::ordered_json j;
  j["timestamp"] = e.timestamp;
  j["contest_id"] = e.contest_id;
  j["session_id"] = e.session_id;
  j["subject_id"] = e.subject_id;
  j["trial_id"] = e.trial_id;
  j["choice"] = engine::to_string(e.choice);
  j["outcome"] = engine::to_string(e.outcome);
  j["placement"] = engine::to_string(e.placement);
  j["practice"] = e.practice;
  j["profession"] = stats::to_string(e.profession);
  return j.dump();
}

engine::GuessEvent decode_event(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("invalid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ParseError("event is not a JSON object");
  try {
    engine::GuessEvent e;
    e.timestamp = j.at("timestamp").get<std::int64_t>();
    e.contest_id = j.at("contest_id").get<std::string>();
    e.session_id = j.at("session_id").get<std::string>();
    e.subject_id = j.at("subject_id").get<std::string>();
    e.trial_id = j.at("trial_id").get<std::string>();
    e.choice = engine::choice_from_string(j.at("choice").get<std::string>());
    e.outcome = engine::outcome_from_string(j.at("outcome").get<std::string>());
    e.placement = engine::placement_from_string(j.at("placement").get<std::string>());
    e.practice = j.at("practice").get<bool>();
    e.profession = stats::profession_from_string(j.at("profession").get<std::string>());
    if (j.size() != 10) throw ParseError("event has unexpected fields");
    if (e.choice == engine::Choice::kTimeout && e.outcome == engine::Outcome::kCorrect) {
      throw ParseError("timeout recorded as correct");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("bad event field: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ParseError(std::string("bad event field: ") + ex.what());
  }
}

EventLog::EventLog(std::filesystem::path path) : EventLog(std::move(path), Options{}) {}

EventLog::EventLog(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(std::move(options)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw_errno("open " + path_.string());

  // Cut an unterminated tail left by an interrupted append.
  struct stat st {};
  if (::fstat(fd_, &st) != 0) throw_errno("stat " + path_.string());
  off_t size = st.st_size;
  off_t keep = size;
  char c = 0;
  while (keep > 0) {
    if (::pread(fd_, &c, 1, keep - 1) != 1) throw_errno("read " + path_.string());
    if (c == '\n') break;
    --keep;
  }
  if (keep != size) {
    if (::ftruncate(fd_, keep) != 0) throw_errno("truncate " + path_.string());
    repaired_bytes_ = static_cast<std::uint64_t>(size - keep);
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::uint64_t EventLog::append(const engine::GuessEvent& event) {
  std::string line = encode_event(event);
  line.push_back('\n');

  std::lock_guard lock(mutex_);
  if (torn_) {
    throw std::system_error(std::make_error_code(std::errc::io_error),
                            "log " + path_.string() + " has a torn tail; reopen to repair");
  }
  const off_t offset = ::lseek(fd_, 0, SEEK_END);
  if (offset < 0) throw_errno("seek " + path_.string());

  std::size_t to_write = line.size();
  if (options_.fault_injector) to_write = std::min(to_write, options_.fault_injector(line.size()));

  std::size_t written = 0;
  while (written < to_write) {
    const auto n = ::write(fd_, line.data() + written, to_write - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      // Never leave a partial line behind for readers.
      if (::ftruncate(fd_, offset) != 0) {
        // the original write error is the one worth reporting
      }
      errno = saved;
      throw_errno("append " + path_.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (written < line.size()) {
    torn_ = true;
    throw std::system_error(std::make_error_code(std::errc::io_error),
                            "injected crash after " + std::to_string(written) + " bytes");
  }
  if (options_.fsync_each && ::fsync(fd_) != 0) throw_errno("fsync " + path_.string());
  return static_cast<std::uint64_t>(offset);
}

LogReadResult parse_event_log(std::string_view contents) {
  LogReadResult out;
  std::size_t line_no = 0;
  while (!contents.empty()) {
    ++line_no;
    const auto nl = contents.find('\n');
    if (nl == std::string_view::npos) {
      out.partial_line = line_no;
      break;
    }
    const auto line = contents.substr(0, nl);
    contents.remove_prefix(nl + 1);
    out.lines.emplace_back(line);
    try {
      out.events.push_back(decode_event(line));
    } catch (const ParseError& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

LogReadResult read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_event_log(buf.str());
}

}  // namespace chartduel::store
