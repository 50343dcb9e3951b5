#pragma once

#include "adaptrv/bench.hpp"
#include "adaptrv/event.hpp"
#include "adaptrv/pattern.hpp"
#include "adaptrv/psp_catalog.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using namespace adaptrv;

inline const std::vector<std::pair<PatternKind, ScopeKind>> &supported_pairs() {
  static const std::vector<std::pair<PatternKind, ScopeKind>> pairs = {
      {PatternKind::Absence, ScopeKind::Globally},
      {PatternKind::Absence, ScopeKind::Before},
      {PatternKind::Absence, ScopeKind::After},
      {PatternKind::Absence, ScopeKind::Between},
      {PatternKind::Recurrence, ScopeKind::Globally},
      {PatternKind::Recurrence, ScopeKind::Between},
      {PatternKind::Response, ScopeKind::Globally},
      {PatternKind::Response, ScopeKind::Between},
      {PatternKind::ResponseChain, ScopeKind::Between},
  };
  return pairs;
}

/// Random valid instance of the given pair with distinct event names.
inline PatternInstance random_instance_of(std::mt19937_64 &rng, PatternKind pattern,
                                          ScopeKind scope_kind) {
  static const std::vector<std::string> pool = {
      "a", "b", "req", "Ack", "cycle_start", "cycle_end", "x1", "sensor_t",
      "Q", "r_2", "ping", "pong", "alarm", "tick7", "S", "go"};
  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), rng);
  std::size_t next = 0;
  auto take = [&] { return names[next++]; };
  auto dur = [&] { return static_cast<TimeMs>(rng() % 12) * 250 + static_cast<TimeMs>(rng() % 2); };

  Scope scope;
  switch (scope_kind) {
  case ScopeKind::Globally: scope = Scope::globally(); break;
  case ScopeKind::Before: scope = Scope::before(take()); break;
  case ScopeKind::After: scope = Scope::after(take()); break;
  case ScopeKind::Between: {
    auto q = take();
    scope = Scope::between(q, take());
    break;
  }
  }
  switch (pattern) {
  case PatternKind::Absence: return PatternInstance::absence(scope, take());
  case PatternKind::Recurrence: return PatternInstance::recurrence(scope, take(), 1 + dur());
  case PatternKind::Response: {
    auto p = take();
    return PatternInstance::response(scope, p, {{take(), dur()}});
  }
  case PatternKind::ResponseChain: {
    auto p = take();
    std::vector<TimedResponse> rs;
    std::size_t n = 2 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i)
      rs.push_back({take(), dur()});
    return PatternInstance::response(scope, p, rs);
  }
  }
  return {};
}

inline PatternInstance random_instance(std::mt19937_64 &rng) {
  auto [pattern, scope_kind] = supported_pairs()[rng() % supported_pairs().size()];
  return random_instance_of(rng, pattern, scope_kind);
}

/// Events drawn from the instance's names plus one irrelevant type, with gaps
/// scaled to the largest bound so that both timely and late behavior occur.
inline Trace random_trace(const PatternInstance &p, std::mt19937_64 &rng, std::size_t length) {
  auto names = event_names(p);
  names.push_back("noise");
  TimeMs bound = p.recurrence_period_ms.value_or(0);
  for (const auto &r : p.responses)
    bound = std::max(bound, r.deadline_ms);
  TimeMs max_gap = std::max<TimeMs>(2, bound / 2 + 1);
  Trace t;
  TimeMs now = 0;
  for (std::size_t i = 0; i < length; ++i) {
    if (rng() % 5 != 0)
      now += static_cast<TimeMs>(rng() % static_cast<std::uint64_t>(max_gap));
    t.push_back({names[rng() % names.size()], now});
  }
  return t;
}

inline PatternInstance bsn() { return bsn_requirement(); }

inline const char *bsn_text() {
  return "Between cycle_starting and cycle_ending, if request then in response "
         "thermometer_reply eventually within 2000 followed by pulse_reply within 2000";
}

} // namespace testing_support
