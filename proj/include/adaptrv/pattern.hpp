#pragma once

#include "adaptrv/event.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adaptrv {

enum class PatternKind { Absence, Recurrence, Response, ResponseChain };
enum class ScopeKind { Globally, Before, After, Between };

std::string_view to_string(PatternKind kind);
std::string_view to_string(ScopeKind kind);

struct Scope {
  ScopeKind kind = ScopeKind::Globally;
  std::string open;  // Q; set for After and Between
  std::string close; // R; set for Before and Between

  static Scope globally() { return {}; }
  static Scope before(std::string r) { return {ScopeKind::Before, {}, std::move(r)}; }
  static Scope after(std::string q) { return {ScopeKind::After, std::move(q), {}}; }
  static Scope between(std::string q, std::string r) {
    return {ScopeKind::Between, std::move(q), std::move(r)};
  }

  bool has_open() const { return kind == ScopeKind::After || kind == ScopeKind::Between; }
  bool has_close() const { return kind == ScopeKind::Before || kind == ScopeKind::Between; }

  bool operator==(const Scope &) const = default;
};

struct TimedResponse {
  std::string event;
  TimeMs deadline_ms = 0;

  bool operator==(const TimedResponse &) const = default;
};

/// A parsed requirement: pattern kind, scope, placeholders and time bounds.
struct PatternInstance {
  PatternKind pattern = PatternKind::Absence;
  Scope scope;
  std::optional<std::string> trigger; // P of Response / ResponseChain
  std::optional<std::string> subject; // constrained event of Absence / Recurrence
  std::vector<TimedResponse> responses;
  std::optional<TimeMs> recurrence_period_ms;

  bool operator==(const PatternInstance &) const = default;

  static PatternInstance absence(Scope scope, std::string subject);
  static PatternInstance recurrence(Scope scope, std::string subject, TimeMs period_ms);
  /// Builds Response for one response and ResponseChain for more.
  static PatternInstance response(Scope scope, std::string trigger,
                                  std::vector<TimedResponse> responses);
};

/// Every event name the instance mentions, in declaration order.
std::vector<std::string> event_names(const PatternInstance &p);

/// Empty when the instance satisfies the structural invariants; otherwise a
/// human-readable reason.
std::string check_invariants(const PatternInstance &p);

/// Throws Error(InvalidPattern) when check_invariants reports a problem.
void require_valid(const PatternInstance &p);

/// Whether the (pattern, scope) pair has an MTL template and observer template.
bool is_supported(PatternKind pattern, ScopeKind scope);

} // namespace adaptrv
