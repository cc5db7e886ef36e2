#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chartduel {

/// Input shorter than an operation requires.
class LengthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Not enough data to carve the requested material.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, std::size_t max_feasible)
      : std::runtime_error(what), max_feasible_(max_feasible) {}
  std::size_t max_feasible() const noexcept { return max_feasible_; }

 private:
  std::size_t max_feasible_;
};

/// Malformed input data (CSV rows, log lines, config values).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  /// 1-based line number, 0 when not line-oriented.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Operation rejected by a state machine; state is unchanged.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace chartduel
