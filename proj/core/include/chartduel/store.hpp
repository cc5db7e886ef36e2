#pragma once

// Dataset ingestion, the blinded codename registry, and the append-only
// JSONL event log.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chartduel/engine.hpp"
#include "chartduel/series.hpp"

namespace chartduel::store {

using Frequency = engine::Mode;

/// Parses `date,price` (daily) or `timestamp,price` (tick) CSV. Rows must be
/// strictly ascending in time with finite positive prices. Errors are
/// ParseError carrying the 1-based line number.
series::PricePath load_prices(const std::filesystem::path& file, Frequency frequency);
series::PricePath parse_prices(std::string_view csv, Frequency frequency);

/// Half-open range over the return indices.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

inline constexpr double kPracticeFraction = 0.10;

/// Final `fraction` of the returns, reserved for practice.
IndexRange practice_slice_for(std::size_t return_count, double fraction = kPracticeFraction);

struct DatasetRecord {
  std::string codename;            // shown to subjects
  std::string source_description;  // private
  Frequency frequency = Frequency::kDaily;
  series::PricePath prices;
  IndexRange practice_slice;
};

/// Scoring returns (everything before the practice slice) and practice returns.
struct SplitReturns {
  series::ReturnSequence scoring;
  std::optional<series::ReturnSequence> practice;
};
SplitReturns split_returns(const DatasetRecord& record);

struct PublicDatasetInfo {
  std::string codename;
  Frequency frequency = Frequency::kDaily;
  std::size_t return_count = 0;
  std::size_t practice_returns = 0;
};

class DatasetRegistry {
 public:
  /// Carves the default practice slice if the record has none. Throws
  /// std::invalid_argument on a duplicate codename or a codename equal to its
  /// source description.
  const DatasetRecord& register_dataset(DatasetRecord record);
  const DatasetRecord& get(const std::string& codename) const;
  bool contains(const std::string& codename) const;
  /// Codenames only; source descriptions never appear here.
  std::vector<PublicDatasetInfo> listing() const;
  std::size_t size() const { return records_.size(); }

  /// registry.json plus one <codename>.csv per dataset.
  void save(const std::filesystem::path& dir) const;
  static DatasetRegistry load(const std::filesystem::path& dir);

 private:
  std::map<std::string, DatasetRecord> records_;
};

// ---- event log -----------------------------------------------------------

/// One JSON object, fixed key order, no trailing newline.
std::string encode_event(const engine::GuessEvent& event);
/// Throws ParseError on malformed input.
engine::GuessEvent decode_event(std::string_view line);

/// Single-writer append-only JSONL log. Each event becomes one line written
/// with a single write(2) on an O_APPEND descriptor; a trailing partial line
/// left by a crash is cut off when the log is reopened.
class EventLog {
 public:
  struct Options {
    bool fsync_each = false;
    /// Test hook: returns how many bytes of the next line to actually write.
    /// Writing fewer than the full line then throws, as a crash would.
    std::function<std::size_t(std::size_t)> fault_injector;
  };

  explicit EventLog(std::filesystem::path path);
  EventLog(std::filesystem::path path, Options options);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Returns the byte offset of the appended line. Throws std::system_error on
  /// storage failure; after a torn write the log refuses further appends until
  /// it is reopened (which cuts the torn tail).
  std::uint64_t append(const engine::GuessEvent& event);
  const std::filesystem::path& path() const { return path_; }
  /// Bytes cut from a partial final line when the log was opened.
  std::uint64_t repaired_bytes() const { return repaired_bytes_; }

 private:
  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  std::uint64_t repaired_bytes_ = 0;
  bool torn_ = false;
  std::mutex mutex_;
};

struct LogLineError {
  std::size_t line = 0;
  std::string message;
};

struct LogReadResult {
  std::vector<engine::GuessEvent> events;
  std::vector<std::string> lines;        // raw complete lines, same order
  std::optional<std::size_t> partial_line;  // line number of an unterminated tail
  std::vector<LogLineError> errors;
};

/// Reads every complete line. An unterminated final line is reported in
/// `partial_line` and otherwise ignored.
LogReadResult read_event_log(const std::filesystem::path& path);
LogReadResult parse_event_log(std::string_view contents);

// ---- replay --------------------------------------------------------------

struct ReplayedContest {
  std::optional<stats::ContestResult> result;
  std::vector<stats::SubjectRecord> records;
  std::vector<stats::Exclusion> excluded;
  std::vector<std::string> incomplete_sessions;
};

/// Rebuilds per-contest aggregates from logged events. Practice events are
/// skipped. Records come out in session creation order, as live ones do. charts_per_subject is the largest per-session event count unless
/// given; sessions with fewer events are incomplete and left out.
std::map<std::string, ReplayedContest> replay(
    const std::vector<engine::GuessEvent>& events,
    double min_response_rate = stats::kDefaultMinResponseRate,
    std::optional<std::int64_t> charts_per_subject = std::nullopt);

}  // namespace chartduel::store
