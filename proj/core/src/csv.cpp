#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chartduel/errors.hpp"
#include "chartduel/store.hpp"

namespace chartduel::store {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

// Time keys are either all numeric (epoch-like) or all ISO-8601 strings,
// which sort lexicographically.
struct TimeKey {
  std::optional<double> numeric;
  std::string text;
};

int compare(const TimeKey& a, const TimeKey& b) {
  if (a.numeric && b.numeric) return *a.numeric < *b.numeric ? -1 : (*a.numeric > *b.numeric);
  return a.text.compare(b.text);
}

}  // namespace

series::PricePath parse_prices(std::string_view csv, Frequency frequency) {
  const std::string_view expected_time = frequency == Frequency::kDaily ? "date" : "timestamp";
  if (csv.size() >= 3 && csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);

  std::vector<double> prices;
  std::optional<TimeKey> previous;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv.remove_prefix(nl == std::string_view::npos ? csv.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two comma-separated fields",
                       line_no);
    }
    const auto time_field = trim(line.substr(0, comma));
    const auto price_field = trim(line.substr(comma + 1));

    if (!header_seen) {
      if (time_field != expected_time || price_field != "price") {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                             std::string(expected_time) + ",price'",
                         line_no);
      }
      header_seen = true;
      continue;
    }

    const auto price = parse_double(price_field);
    if (!price) {
      throw ParseError("line " + std::to_string(line_no) + ": unparseable price '" +
                           std::string(price_field) + "'",
                       line_no);
    }
    if (!std::isfinite(*price) || *price <= 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": price must be finite and positive",
                       line_no);
    }
    if (time_field.empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty time field", line_no);
    }
    TimeKey key{parse_double(time_field), std::string(time_field)};
    if (previous) {
      if ((previous->numeric.has_value()) != (key.numeric.has_value())) {
        throw ParseError("line " + std::to_string(line_no) + ": mixed numeric and text time keys",
                         line_no);
      }
      const int c = compare(*previous, key);
      if (c == 0) {
        throw ParseError("line " + std::to_string(line_no) + ": duplicate time '" + key.text + "'",
                         line_no);
      }
      if (c > 0) {
        throw ParseError("line " + std::to_string(line_no) + ": time '" + key.text +
                             "' is earlier than the previous row",
                         line_no);
      }
    }
    previous = std::move(key);
    prices.push_back(*price);
  }
  if (!header_seen) throw ParseError("empty price file", 0);
  if (prices.size() < 2) {
    throw ParseError("need at least 2 price rows, got " + std::to_string(prices.size()), line_no);
  }
  return series::PricePath(std::move(prices));
}

series::PricePath load_prices(const std::filesystem::path& file, Frequency frequency) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open " + file.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prices(buf.str(), frequency);
}

}  // namespace chartduel::store
