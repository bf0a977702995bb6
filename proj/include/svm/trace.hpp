#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svm/clock.hpp"

namespace svm {

// One line per record:  t=<ms> ev=<kind> key=value ...
// Every kind has a fixed, ordered field list (see trace_schema()).

struct TraceRecord {
  std::uint64_t time_ms = 0;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;

  std::string format() const;
  /// Value of `key`, or empty when absent.
  std::string_view get(std::string_view key) const;
};

struct TraceKind {
  std::string_view name;
  std::vector<std::string_view> fields;
};

const std::vector<TraceKind>& trace_schema();

/// Parses and validates one line against the schema; ParseError on any
/// unknown kind, unknown or missing field, or malformed token.
TraceRecord parse_trace_line(std::string_view line);

class Trace {
 public:
  explicit Trace(const VirtualClock* clock = nullptr) : clock_(clock) {}

  void bind_clock(const VirtualClock* clock) { clock_ = clock; }
  void set_enabled(bool on) { enabled_ = on; }

  void emit(std::string_view kind, std::initializer_list<std::pair<std::string_view, std::string>> fields);

  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;

 private:
  const VirtualClock* clock_;
  bool enabled_ = true;
  std::vector<std::string> lines_;
};

}  // namespace svm
