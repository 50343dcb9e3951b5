#include "adaptrv/pap_engine.hpp"

#include "adaptrv/error.hpp"
#include "adaptrv/psp_catalog.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace adaptrv {

AdaptationRule AdaptationRule::update_time_guard(TimeMs bound,
                                                 std::optional<std::size_t> which) {
  AdaptationRule r;
  r.kind = Kind::UpdateTimeGuard;
  r.bound_ms = bound;
  r.index = which;
  return r;
}

AdaptationRule AdaptationRule::update_event(std::string from, std::string to) {
  AdaptationRule r;
  r.kind = Kind::UpdateEvent;
  r.old_name = std::move(from);
  r.new_name = std::move(to);
  return r;
}

AdaptationRule AdaptationRule::add_response(std::string event, TimeMs bound) {
  AdaptationRule r;
  r.kind = Kind::AddResponse;
  r.new_name = std::move(event);
  r.bound_ms = bound;
  return r;
}

AdaptationRule AdaptationRule::remove_response(std::size_t index) {
  AdaptationRule r;
  r.kind = Kind::RemoveResponse;
  r.index = index;
  return r;
}

AdaptationRule AdaptationRule::split_chain() {
  AdaptationRule r;
  r.kind = Kind::SplitChain;
  return r;
}

std::string_view to_string(AdaptationRule::Kind kind) {
  switch (kind) {
  case AdaptationRule::Kind::UpdateTimeGuard: return "UPDATE_GUARD";
  case AdaptationRule::Kind::UpdateEvent: return "UPDATE_EVENT";
  case AdaptationRule::Kind::AddResponse: return "ADD_RESPONSE";
  case AdaptationRule::Kind::RemoveResponse: return "REMOVE_RESPONSE";
  case AdaptationRule::Kind::SplitChain: return "SPLIT";
  }
  return "?";
}

std::string to_command(const AdaptationRule &rule) {
  std::string out(to_string(rule.kind));
  switch (rule.kind) {
  case AdaptationRule::Kind::UpdateTimeGuard:
    out += " " + std::to_string(rule.bound_ms);
    if (rule.index)
      out += " " + std::to_string(*rule.index);
    break;
  case AdaptationRule::Kind::UpdateEvent:
    out += " " + rule.old_name + " " + rule.new_name;
    break;
  case AdaptationRule::Kind::AddResponse:
    out += " " + rule.new_name + " " + std::to_string(rule.bound_ms);
    break;
  case AdaptationRule::Kind::RemoveResponse:
    out += " " + std::to_string(rule.index.value_or(0));
    break;
  case AdaptationRule::Kind::SplitChain:
    break;
  }
  return out;
}

namespace {

[[noreturn]] void bad_command(const std::string &msg) {
  throw Error(ErrorCode::BadCommand, msg);
}

TimeMs parse_ms(const std::string &word) {
  TimeMs v = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc() || ptr != word.data() + word.size() || v < 0)
    bad_command("expected a non-negative integer, got '" + word + "'");
  return v;
}

} // namespace

AdaptationRule parse_adaptation(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> w;
  for (std::string s; in >> s;)
    w.push_back(s);
  if (w.empty())
    bad_command("missing adaptation kind");
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (w.size() - 1 < lo || w.size() - 1 > hi)
      bad_command(w[0] + " takes " + std::to_string(lo) +
                  (lo == hi ? "" : "-" + std::to_string(hi)) + " argument(s)");
  };
  std::string k = w[0];
  std::transform(k.begin(), k.end(), k.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (k == "UPDATE_GUARD") {
    arity(1, 2);
    std::optional<std::size_t> which;
    if (w.size() == 3)
      which = static_cast<std::size_t>(parse_ms(w[2]));
    return AdaptationRule::update_time_guard(parse_ms(w[1]), which);
  }
  if (k == "UPDATE_EVENT") {
    arity(2, 2);
    return AdaptationRule::update_event(w[1], w[2]);
  }
  if (k == "ADD_RESPONSE") {
    arity(2, 2);
    return AdaptationRule::add_response(w[1], parse_ms(w[2]));
  }
  if (k == "REMOVE_RESPONSE") {
    arity(1, 1);
    return AdaptationRule::remove_response(static_cast<std::size_t>(parse_ms(w[1])));
  }
  if (k == "SPLIT") {
    arity(0, 0);
    return AdaptationRule::split_chain();
  }
  bad_command("unknown adaptation '" + k + "'");
}

namespace {

[[noreturn]] void wrong_pattern(const PatternInstance &p, std::string_view rule) {
  throw Error(ErrorCode::WrongPattern,
              std::string(rule) + " does not apply to " + std::string(to_string(p.pattern)) +
                  " " + std::string(to_string(p.scope.kind)));
}

bool uses_event(const PatternInstance &p, const std::string &name) {
  if ((p.scope.has_open() && p.scope.open == name) ||
      (p.scope.has_close() && p.scope.close == name) || (p.trigger && *p.trigger == name) ||
      (p.subject && *p.subject == name))
    return true;
  return std::any_of(p.responses.begin(), p.responses.end(),
                     [&](const TimedResponse &r) { return r.event == name; });
}

bool is_response(const PatternInstance &p) {
  return p.pattern == PatternKind::Response || p.pattern == PatternKind::ResponseChain;
}

// Working copy of an observer's structure and run state.
struct Draft {
  std::vector<StateId> states;
  StateId initial, error;
  std::vector<Transition> transitions;
  StateId current;
  std::optional<TimeMs> clock_reset_at, last_time;

  explicit Draft(const Observer &o)
      : states(o.states()), initial(o.initial()), error(o.error()),
        transitions(o.transitions()), current(o.current()),
        clock_reset_at(o.clock_reset_at()), last_time(o.last_time()) {}

  Observer build() && {
    Observer o(std::move(states), std::move(initial), std::move(error),
               std::move(transitions));
    o.set_run_state(current, clock_reset_at, last_time);
    return o;
  }

  bool has(const StateId &s) const {
    return std::find(states.begin(), states.end(), s) != states.end();
  }

  void rename(const StateId &from, const StateId &to) {
    for (auto &s : states)
      if (s == from)
        s = to;
    for (auto &t : transitions) {
      if (t.source == from)
        t.source = to;
      if (t.target == from)
        t.target = to;
    }
    if (current == from)
      current = to;
  }
};

// Locations of the response chain open -P-> w1 -S1-> ... -Sn-> open.
struct ChainView {
  StateId idle;                  // the state P leaves from
  std::vector<StateId> waits;    // w1..wn
  std::size_t trigger_edge = 0;  // index of open -P-> w1
  std::vector<std::size_t> edges; // index of w_i -S_i-> next
};

std::optional<std::size_t> find_edge(const std::vector<Transition> &ts,
                                     const std::optional<StateId> &source,
                                     const std::string &label) {
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i].label && *ts[i].label == label && (!source || ts[i].source == *source))
      return i;
  return std::nullopt;
}

ChainView walk_chain(const std::vector<Transition> &ts, const PatternInstance &p) {
  auto broken = [] {
    throw Error(ErrorCode::TemplateValidationError,
                "observer does not have the response chain shape of its pattern");
  };
  ChainView v;
  auto trig = find_edge(ts, std::nullopt, *p.trigger);
  if (!trig)
    broken();
  v.trigger_edge = *trig;
  v.idle = ts[*trig].source;
  StateId at = ts[*trig].target;
  for (const auto &r : p.responses) {
    v.waits.push_back(at);
    auto e = find_edge(ts, at, r.event);
    if (!e)
      broken();
    v.edges.push_back(*e);
    at = ts[*e].target;
  }
  if (at != v.idle)
    broken();
  return v;
}

StateId fresh_waiting(const Draft &d, std::size_t hint) {
  for (std::size_t k = hint;; ++k) {
    StateId name = "waiting_" + std::to_string(k);
    if (!d.has(name))
      return name;
  }
}

std::size_t waiting_number(const StateId &s) {
  auto pos = s.rfind('_');
  if (pos == std::string::npos)
    return 1;
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos + 1, s.data() + s.size(), n);
  return ec == std::errc() ? n : 0;
}

AdaptationOutcome single(Observer obs, PatternInstance p, std::string map,
                         std::vector<StateId> changed) {
  AdaptationOutcome out;
  out.properties.push_back({std::move(obs), std::move(p)});
  out.state_map = std::move(map);
  out.changed_states = std::move(changed);
  return out;
}

void note(std::vector<StateId> &changed, const StateId &s) {
  if (std::find(changed.begin(), changed.end(), s) == changed.end())
    changed.push_back(s);
}

std::string persist_map(const Observer &obs) {
  return obs.current() + " -> " + obs.current();
}

} // namespace

AdaptationOutcome update_time_guard(const Observer &obs, const PatternInstance &p,
                                    const AdaptationRule &rule) {
  if (p.pattern == PatternKind::Absence)
    throw Error(ErrorCode::NoTimeBound, "Absence has no time bound");
  if (rule.bound_ms < 0)
    throw Error(ErrorCode::InvalidPattern, "time bound must be non-negative");
  Draft d(obs);
  PatternInstance np = p;
  std::vector<StateId> changed;
  if (p.pattern == PatternKind::Recurrence) {
    if (rule.index && *rule.index != 1)
      throw Error(ErrorCode::BadIndex, "Recurrence has a single time bound");
    for (auto &t : d.transitions)
      if (t.guard) {
        t.guard->bound_ms = rule.bound_ms;
        note(changed, t.source);
      }
    np.recurrence_period_ms = rule.bound_ms;
  } else {
    std::size_t n = p.responses.size();
    if (rule.index && (*rule.index < 1 || *rule.index > n))
      throw Error(ErrorCode::BadIndex, "response index " + std::to_string(*rule.index) +
                                           " outside 1.." + std::to_string(n));
    ChainView v = walk_chain(d.transitions, p);
    for (std::size_t j = 0; j < n; ++j) {
      if (rule.index && *rule.index != j + 1)
        continue;
      for (auto &t : d.transitions)
        if (t.source == v.waits[j] && t.guard)
          t.guard->bound_ms = rule.bound_ms;
      np.responses[j].deadline_ms = rule.bound_ms;
      note(changed, v.waits[j]);
    }
  }
  return single(std::move(d).build(), std::move(np), persist_map(obs), std::move(changed));
}

AdaptationOutcome update_event(const Observer &obs, const PatternInstance &p,
                               const AdaptationRule &rule) {
  if (!uses_event(p, rule.old_name))
    throw Error(ErrorCode::UnknownEvent, "event '" + rule.old_name + "' is not part of " +
                                             render_requirement(p));
  if (rule.old_name == rule.new_name)
    return single(obs, p, persist_map(obs), {});
  if (uses_event(p, rule.new_name))
    throw Error(ErrorCode::NameCollision, "event '" + rule.new_name + "' is already used");
  if (rule.new_name.empty())
    throw Error(ErrorCode::InvalidPattern, "event name must not be empty");

  Draft d(obs);
  std::vector<StateId> changed;
  for (auto &t : d.transitions)
    if (t.label && *t.label == rule.old_name) {
      t.label = rule.new_name;
      note(changed, t.source);
    }
  PatternInstance np = p;
  auto swap = [&](std::string &s) {
    if (s == rule.old_name)
      s = rule.new_name;
  };
  swap(np.scope.open);
  swap(np.scope.close);
  if (np.trigger)
    swap(*np.trigger);
  if (np.subject)
    swap(*np.subject);
  for (auto &r : np.responses)
    swap(r.event);
  return single(std::move(d).build(), std::move(np), persist_map(obs), std::move(changed));
}

AdaptationOutcome add_response(const Observer &obs, const PatternInstance &p,
                               const AdaptationRule &rule) {
  if (!is_response(p) || p.scope.kind != ScopeKind::Between)
    wrong_pattern(p, "ADD_RESPONSE");
  if (uses_event(p, rule.new_name))
    throw Error(ErrorCode::NameCollision, "event '" + rule.new_name + "' is already used");
  if (rule.bound_ms < 0)
    throw Error(ErrorCode::InvalidPattern, "time bound must be non-negative");

  Draft d(obs);
  ChainView v = walk_chain(d.transitions, p);
  if (v.waits.size() == 1 && v.waits[0] == "waiting" && !d.has("waiting_1")) {
    d.rename("waiting", "waiting_1");
    v.waits[0] = "waiting_1";
  }
  std::size_t highest = 0;
  for (const auto &w : v.waits)
    highest = std::max(highest, waiting_number(w));
  StateId added = fresh_waiting(d, std::max(highest, v.waits.size()) + 1);

  auto err_pos = std::find(d.states.begin(), d.states.end(), d.error);
  d.states.insert(err_pos, added);
  Transition &last = d.transitions[v.edges.back()];
  last.target = added;
  last.reset = true;
  std::vector<StateId> changed{last.source, added};
  d.transitions.push_back({added, v.idle, rule.new_name,
                           Guard{GuardOp::AtMost, rule.bound_ms}, false});
  d.transitions.push_back({added, d.error, p.scope.close, std::nullopt, false});
  d.transitions.push_back(
      {added, d.error, std::nullopt, Guard{GuardOp::Exceeds, rule.bound_ms}, false});

  PatternInstance np = p;
  np.responses.push_back({rule.new_name, rule.bound_ms});
  np.pattern = PatternKind::ResponseChain;
  std::string map = obs.current() + " -> " + d.current;
  return single(std::move(d).build(), std::move(np), std::move(map), std::move(changed));
}

AdaptationOutcome remove_response(const Observer &obs, const PatternInstance &p,
                                  const AdaptationRule &rule) {
  if (p.pattern != PatternKind::ResponseChain)
    wrong_pattern(p, "REMOVE_RESPONSE");
  const std::size_t n = p.responses.size();
  const std::size_t i = rule.index.value_or(0);
  if (i < 1 || i > n)
    throw Error(ErrorCode::BadIndex,
                "response index " + std::to_string(i) + " outside 1.." + std::to_string(n));

  Draft d(obs);
  ChainView v = walk_chain(d.transitions, p);
  const StateId removed = v.waits[i - 1];
  const StateId succ = i < n ? v.waits[i] : v.idle;
  Transition &pred = d.transitions[i == 1 ? v.trigger_edge : v.edges[i - 2]];
  pred.target = succ;
  pred.reset = succ != v.idle;
  std::vector<StateId> changed{pred.source};

  if (d.current == removed)
    d.current = succ;
  std::erase(d.states, removed);
  std::erase_if(d.transitions, [&](const Transition &t) {
    return t.source == removed || t.target == removed;
  });

  PatternInstance np = p;
  np.responses.erase(np.responses.begin() + static_cast<std::ptrdiff_t>(i - 1));
  if (np.responses.size() == 1) {
    np.pattern = PatternKind::Response;
    StateId remaining = i == 1 ? v.waits[1] : v.waits[0];
    if (!d.has("waiting")) {
      d.rename(remaining, "waiting");
      std::replace(changed.begin(), changed.end(), remaining, StateId("waiting"));
    }
  }
  std::string map = obs.current() + " -> " + d.current;
  return single(std::move(d).build(), std::move(np), std::move(map), std::move(changed));
}

AdaptationOutcome split_chain(const Observer &obs, const PatternInstance &p,
                              const AdaptationRule &) {
  if (p.pattern != PatternKind::ResponseChain)
    wrong_pattern(p, "SPLIT");
  ChainView v = walk_chain(obs.transitions(), p);
  auto at = std::find(v.waits.begin(), v.waits.end(), obs.current());
  // 1-based position of the current waiting state; 0 when not waiting.
  std::size_t i = at == v.waits.end() ? 0 : static_cast<std::size_t>(at - v.waits.begin()) + 1;

  AdaptationOutcome out;
  std::vector<std::string> mapped;
  for (std::size_t j = 1; j <= p.responses.size(); ++j) {
    PatternInstance np = PatternInstance::response(p.scope, *p.trigger, {p.responses[j - 1]});
    Observer o = instantiate_observer(np);
    StateId cur = obs.current();
    if (i > 0)
      cur = j < i ? v.idle : StateId("waiting");
    o.set_run_state(cur, obs.clock_reset_at(), obs.last_time());
    mapped.push_back(cur);
    out.properties.push_back({std::move(o), std::move(np)});
  }
  out.state_map = obs.current() + " -> [";
  for (std::size_t k = 0; k < mapped.size(); ++k)
    out.state_map += (k ? ", " : "") + mapped[k];
  out.state_map += "]";
  return out;
}

AdaptationOutcome apply(const Observer &obs, const PatternInstance &p,
                        const AdaptationRule &rule) {
  AdaptationOutcome out = [&] {
    switch (rule.kind) {
    case AdaptationRule::Kind::UpdateTimeGuard: return update_time_guard(obs, p, rule);
    case AdaptationRule::Kind::UpdateEvent: return update_event(obs, p, rule);
    case AdaptationRule::Kind::AddResponse: return add_response(obs, p, rule);
    case AdaptationRule::Kind::RemoveResponse: return remove_response(obs, p, rule);
    case AdaptationRule::Kind::SplitChain: return split_chain(obs, p, rule);
    }
    throw Error(ErrorCode::BadCommand, "unknown adaptation");
  }();
  for (const auto &prop : out.properties) {
    require_valid(prop.pattern);
    if (auto issues = validate(prop.observer, out.changed_states); !issues.empty())
      throw Error(ErrorCode::TemplateValidationError,
                  std::string(to_string(issues.front().kind)) + " in state " +
                      issues.front().state + " after " + to_command(rule));
  }
  return out;
}

} // namespace adaptrv
