#include "adaptrv/pattern.hpp"

#include "adaptrv/error.hpp"

namespace adaptrv {

std::string_view to_string(PatternKind kind) {
  switch (kind) {
  case PatternKind::Absence: return "Absence";
  case PatternKind::Recurrence: return "Recurrence";
  case PatternKind::Response: return "Response";
  case PatternKind::ResponseChain: return "ResponseChain";
  }
  return "?";
}

std::string_view to_string(ScopeKind kind) {
  switch (kind) {
  case ScopeKind::Globally: return "Globally";
  case ScopeKind::Before: return "Before";
  case ScopeKind::After: return "After";
  case ScopeKind::Between: return "Between";
  }
  return "?";
}

PatternInstance PatternInstance::absence(Scope scope, std::string subject) {
  PatternInstance p;
  p.pattern = PatternKind::Absence;
  p.scope = std::move(scope);
  p.subject = std::move(subject);
  return p;
}

PatternInstance PatternInstance::recurrence(Scope scope, std::string subject,
                                            TimeMs period_ms) {
  PatternInstance p;
  p.pattern = PatternKind::Recurrence;
  p.scope = std::move(scope);
  p.subject = std::move(subject);
  p.recurrence_period_ms = period_ms;
  return p;
}

PatternInstance PatternInstance::response(Scope scope, std::string trigger,
                                          std::vector<TimedResponse> responses) {
  PatternInstance p;
  p.pattern = responses.size() == 1 ? PatternKind::Response
                                    : PatternKind::ResponseChain;
  p.scope = std::move(scope);
  p.trigger = std::move(trigger);
  p.responses = std::move(responses);
  return p;
}

std::vector<std::string> event_names(const PatternInstance &p) {
  std::vector<std::string> names;
  if (p.scope.has_open())
    names.push_back(p.scope.open);
  if (p.scope.has_close())
    names.push_back(p.scope.close);
  if (p.trigger)
    names.push_back(*p.trigger);
  if (p.subject)
    names.push_back(*p.subject);
  for (const auto &r : p.responses)
    names.push_back(r.event);
  return names;
}

std::string check_invariants(const PatternInstance &p) {
  switch (p.pattern) {
  case PatternKind::Absence:
  case PatternKind::Recurrence:
    if (!p.subject || p.subject->empty())
      return "missing subject event";
    if (p.trigger || !p.responses.empty())
      return "absence/recurrence take no trigger or responses";
    if (p.pattern == PatternKind::Recurrence && !p.recurrence_period_ms)
      return "recurrence requires a period";
    if (p.pattern == PatternKind::Absence && p.recurrence_period_ms)
      return "absence takes no period";
    break;
  case PatternKind::Response:
  case PatternKind::ResponseChain:
    if (!p.trigger || p.trigger->empty())
      return "missing trigger event";
    if (p.subject || p.recurrence_period_ms)
      return "response patterns take no subject or period";
    if (p.pattern == PatternKind::Response && p.responses.size() != 1)
      return "Response requires exactly one response";
    if (p.pattern == PatternKind::ResponseChain && p.responses.size() < 2)
      return "ResponseChain requires at least two responses";
    break;
  }
  if (p.scope.has_open() != !p.scope.open.empty() ||
      p.scope.has_close() != !p.scope.close.empty())
    return "scope events do not match scope kind";
  if (p.recurrence_period_ms && *p.recurrence_period_ms < 0)
    return "negative period";
  for (const auto &r : p.responses) {
    if (r.deadline_ms < 0)
      return "negative deadline";
    if (r.event.empty())
      return "empty response event";
  }
  std::vector<std::string_view> names;
  names.reserve(4 + p.responses.size());
  if (p.scope.has_open())
    names.push_back(p.scope.open);
  if (p.scope.has_close())
    names.push_back(p.scope.close);
  if (p.trigger)
    names.push_back(*p.trigger);
  if (p.subject)
    names.push_back(*p.subject);
  for (const auto &r : p.responses)
    names.push_back(r.event);
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (names[i] == names[j])
        return "event name '" + std::string(names[i]) + "' used twice";
  return {};
}

void require_valid(const PatternInstance &p) {
  if (auto why = check_invariants(p); !why.empty())
    throw Error(ErrorCode::InvalidPattern, why);
}

bool is_supported(PatternKind pattern, ScopeKind scope) {
  switch (pattern) {
  case PatternKind::Absence:
    return true;
  case PatternKind::Recurrence:
  case PatternKind::Response:
    return scope == ScopeKind::Globally || scope == ScopeKind::Between;
  case PatternKind::ResponseChain:
    return scope == ScopeKind::Between;
  }
  return false;
}

} // namespace adaptrv
