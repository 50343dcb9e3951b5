#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adaptrv {

/// Virtual time in integer milliseconds.
using TimeMs = std::int64_t;

struct Event {
  std::string type;
  TimeMs timestamp = 0;

  bool operator==(const Event &) const = default;
};

/// Events in non-decreasing timestamp order.
using Trace = std::vector<Event>;

/// Instant up to which a finite trace has been observed: the timestamp of its
/// last event, or 0 for the empty trace.
inline TimeMs horizon(const Trace &trace) {
  return trace.empty() ? 0 : trace.back().timestamp;
}

} // namespace adaptrv
