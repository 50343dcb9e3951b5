#include "adaptrv/observer.hpp"

#include "adaptrv/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace adaptrv {

std::string_view to_string(IssueKind kind) {
  switch (kind) {
  case IssueKind::UnknownState: return "UnknownState";
  case IssueKind::ErrorNotAbsorbing: return "ErrorNotAbsorbing";
  case IssueKind::UnguardedUnlabeled: return "UnguardedUnlabeled";
  case IssueKind::NegativeBound: return "NegativeBound";
  case IssueKind::Nondeterminism: return "Nondeterminism";
  case IssueKind::DuplicateState: return "DuplicateState";
  }
  return "?";
}

Observer::Observer(std::vector<StateId> states, StateId initial, StateId error,
                   std::vector<Transition> transitions)
    : states_(std::move(states)), initial_(std::move(initial)),
      error_(std::move(error)), transitions_(std::move(transitions)) {
  if (std::find(states_.begin(), states_.end(), initial_) == states_.end() ||
      std::find(states_.begin(), states_.end(), error_) == states_.end())
    throw Error(ErrorCode::TemplateValidationError,
                "initial and error must be states of the observer");
  reindex();
  current_ = state_index(initial_);
}

std::optional<std::uint32_t> Observer::find_state(std::string_view s) const {
  for (std::uint32_t i = 0; i < states_.size(); ++i)
    if (states_[i] == s)
      return i;
  return std::nullopt;
}

std::uint32_t Observer::state_index(std::string_view s) const {
  if (auto i = find_state(s))
    return *i;
  throw Error(ErrorCode::TemplateValidationError, "unknown state " + std::string(s));
}

void Observer::reindex() {
  StateId cur = states_.empty() || current_ >= states_.size() ? initial_
                                                               : states_[current_];
  const auto n = static_cast<std::uint32_t>(states_.size());
  std::vector<std::uint32_t> sources(transitions_.size(), n);
  targets_.assign(transitions_.size(), n);
  out_begin_.assign(n + 2, 0);
  for (std::uint32_t i = 0; i < transitions_.size(); ++i) {
    if (auto s = find_state(transitions_[i].source)) {
      sources[i] = *s;
      ++out_begin_[*s + 2];
    }
    if (auto t = find_state(transitions_[i].target))
      targets_[i] = *t;
  }
  for (std::uint32_t i = 2; i < out_begin_.size(); ++i)
    out_begin_[i] += out_begin_[i - 1];
  out_edges_.assign(out_begin_[n + 1], 0);
  for (std::uint32_t i = 0; i < transitions_.size(); ++i)
    if (sources[i] < n)
      out_edges_[out_begin_[sources[i] + 1]++] = i;
  out_begin_.pop_back();
  error_index_ = state_index(error_);
  auto it = find_state(cur);
  current_ = it ? *it : state_index(initial_);
}

std::vector<std::size_t> Observer::outgoing(std::string_view s) const {
  auto i = find_state(s);
  if (!i)
    return {};
  auto r = outgoing_of(*i);
  return {r.begin(), r.end()};
}

void Observer::check_time(TimeMs now) const {
  if (last_time_ && now < *last_time_)
    throw Error(ErrorCode::TimeRegression,
                "timestamp " + std::to_string(now) + " precedes " +
                    std::to_string(*last_time_));
}

void Observer::take(const Transition &t, TimeMs now) {
  current_ = targets_[static_cast<std::size_t>(&t - transitions_.data())];
  if (current_ >= states_.size())
    current_ = state_index(t.target);
  if (t.reset)
    clock_reset_at_ = now;
}

bool Observer::settle(TimeMs now) {
  bool moved = false;
  for (std::size_t round = 0; round <= states_.size(); ++round) {
    const Transition *enabled = nullptr;
    for (auto idx : outgoing_of(current_)) {
      const auto &t = transitions_[idx];
      if (t.label || !t.guard || !t.guard->holds(valuation(now)))
        continue;
      if (enabled)
        throw Error(ErrorCode::NondeterminismDetected,
                    "two timed transitions enabled in state " + current());
      enabled = &t;
    }
    if (!enabled)
      break;
    take(*enabled, now);
    moved = true;
  }
  return moved;
}

StepResult Observer::step(const Event &ev) {
  check_time(ev.timestamp);
  last_time_ = ev.timestamp;
  const Transition *enabled = nullptr;
  TimeMs v = valuation(ev.timestamp);
  for (auto idx : outgoing_of(current_)) {
    const auto &t = transitions_[idx];
    if (!t.label || *t.label != ev.type || (t.guard && !t.guard->holds(v)))
      continue;
    if (enabled)
      throw Error(ErrorCode::NondeterminismDetected,
                  "two transitions enabled in state " + current() + " for " +
                      ev.type);
    enabled = &t;
  }
  if (!enabled)
    return {false, current(), false};
  bool was_error = violated();
  take(*enabled, ev.timestamp);
  settle(ev.timestamp);
  return {true, current(), !was_error && violated()};
}

StepResult Observer::advance_time(TimeMs now) {
  check_time(now);
  last_time_ = now;
  bool was_error = violated();
  bool moved = settle(now);
  return {moved, current(), !was_error && violated()};
}

std::optional<TimeMs> Observer::next_timer() const {
  if (!clock_reset_at_)
    return std::nullopt;
  std::optional<TimeMs> best;
  for (auto idx : outgoing_of(current_)) {
    const auto &t = transitions_[idx];
    if (t.label || !t.guard || t.guard->op != GuardOp::Exceeds)
      continue;
    TimeMs at = *clock_reset_at_ + t.guard->bound_ms + 1;
    if (!best || at < *best)
      best = at;
  }
  return best;
}

void Observer::set_run_state(const StateId &current,
                             std::optional<TimeMs> clock_reset_at,
                             std::optional<TimeMs> last_time) {
  current_ = state_index(current);
  clock_reset_at_ = clock_reset_at;
  last_time_ = last_time;
}

void Observer::add_state(const StateId &s) {
  states_.push_back(s);
  reindex();
}

void Observer::remove_state(const StateId &s) {
  if (s == error_ || s == initial_)
    throw Error(ErrorCode::TemplateValidationError, "cannot remove " + s);
  StateId cur = current();
  std::erase(states_, s);
  std::erase_if(transitions_, [&](const Transition &t) {
    return t.source == s || t.target == s;
  });
  // Keep the current state when it survives; otherwise fall back to initial.
  auto keep = std::find(states_.begin(), states_.end(), cur);
  current_ = keep != states_.end()
                 ? static_cast<std::uint32_t>(keep - states_.begin())
                 : static_cast<std::uint32_t>(
                       std::find(states_.begin(), states_.end(), initial_) -
                       states_.begin());
  reindex();
}

void Observer::rename_state(const StateId &from, const StateId &to) {
  if (from == to)
    return;
  for (auto &s : states_)
    if (s == from)
      s = to;
  for (auto &t : transitions_) {
    if (t.source == from)
      t.source = to;
    if (t.target == from)
      t.target = to;
  }
  if (initial_ == from)
    initial_ = to;
  if (error_ == from)
    error_ = to;
  reindex();
}

void Observer::add_transition(Transition t) {
  transitions_.push_back(std::move(t));
  reindex();
}

void Observer::remove_transitions_if(
    const std::function<bool(const Transition &)> &pred) {
  std::erase_if(transitions_, pred);
  reindex();
}

bool Observer::operator==(const Observer &other) const {
  return states_ == other.states_ && initial_ == other.initial_ &&
         error_ == other.error_ && transitions_ == other.transitions_ &&
         current() == other.current() &&
         clock_reset_at_ == other.clock_reset_at_ &&
         last_time_ == other.last_time_;
}

namespace {

void check_transition(const Observer &obs, const Transition &t,
                      const std::function<bool(const StateId &)> &known,
                      std::vector<ValidationIssue> &issues) {
  for (const auto *end : {&t.source, &t.target})
    if (!known(*end))
      issues.push_back({IssueKind::UnknownState, *end, "transition endpoint"});
  if (t.source == obs.error())
    issues.push_back({IssueKind::ErrorNotAbsorbing, t.source,
                      "error state has an outgoing transition to " + t.target});
  if (!t.label && !t.guard)
    issues.push_back({IssueKind::UnguardedUnlabeled, t.source,
                      "unlabeled transition to " + t.target + " has no guard"});
  if (t.guard && t.guard->bound_ms < 0)
    issues.push_back({IssueKind::NegativeBound, t.source,
                      "guard bound " + std::to_string(t.guard->bound_ms)});
}

// At most one transition of `out` enabled per label (or no label) at each
// boundary valuation.
void check_determinism(const Observer &obs, const StateId &s,
                       const std::vector<std::size_t> &out,
                       const std::vector<TimeMs> &valuations,
                       std::vector<ValidationIssue> &issues) {
  const auto &ts = obs.transitions();
  for (std::size_t a = 0; a < out.size(); ++a) {
    for (std::size_t b = a + 1; b < out.size(); ++b) {
      const auto &x = ts[out[a]];
      const auto &y = ts[out[b]];
      if (x.label != y.label)
        continue;
      for (TimeMs v : valuations) {
        if ((!x.guard || x.guard->holds(v)) && (!y.guard || y.guard->holds(v))) {
          issues.push_back({IssueKind::Nondeterminism, s,
                            (x.label ? "label " + *x.label : std::string("no label")) +
                                " at c=" + std::to_string(v)});
          return;
        }
      }
    }
  }
}

} // namespace

std::vector<ValidationIssue> validate(const Observer &obs) {
  std::vector<ValidationIssue> issues;
  std::set<StateId> states;
  for (const auto &s : obs.states())
    if (!states.insert(s).second)
      issues.push_back({IssueKind::DuplicateState, s, "state declared twice"});

  std::set<TimeMs> bounds{0};
  auto known = [&](const StateId &s) { return states.contains(s); };
  for (const auto &t : obs.transitions()) {
    check_transition(obs, t, known, issues);
    if (t.guard) {
      bounds.insert(t.guard->bound_ms);
      bounds.insert(t.guard->bound_ms + 1);
    }
  }
  std::vector<TimeMs> valuations(bounds.begin(), bounds.end());
  for (const auto &s : obs.states())
    check_determinism(obs, s, obs.outgoing(s), valuations, issues);
  return issues;
}

std::vector<ValidationIssue> validate(const Observer &obs, const std::vector<StateId> &states) {
  std::vector<ValidationIssue> issues;
  auto known = [&](const StateId &s) { return obs.has_state(s); };
  for (const auto &s : states) {
    if (std::count(obs.states().begin(), obs.states().end(), s) > 1)
      issues.push_back({IssueKind::DuplicateState, s, "state declared twice"});
    auto out = obs.outgoing(s);
    std::vector<TimeMs> valuations{0};
    for (auto idx : out) {
      const auto &t = obs.transitions()[idx];
      check_transition(obs, t, known, issues);
      if (t.guard) {
        valuations.push_back(t.guard->bound_ms);
        valuations.push_back(t.guard->bound_ms + 1);
      }
    }
    check_determinism(obs, s, out, valuations, issues);
  }
  return issues;
}

namespace {

using EdgeKey = std::tuple<bool, std::string, bool, int, TimeMs, bool>;

EdgeKey key_of(const Transition &t) {
  return {t.label.has_value(), t.label.value_or(""), t.guard.has_value(),
          t.guard ? static_cast<int>(t.guard->op) : 0,
          t.guard ? t.guard->bound_ms : 0, t.reset};
}

class IsoSearch {
public:
  IsoSearch(const Observer &a, const Observer &b) : a_(a), b_(b) {
    index(a_, a_idx_);
    index(b_, b_idx_);
    sig_a_ = signatures(a_, a_idx_);
    sig_b_ = signatures(b_, b_idx_);
    for (const auto &t : b_.transitions())
      b_edges_.insert({b_idx_.at(t.source), b_idx_.at(t.target), key_of(t)});
  }

  std::optional<std::vector<std::size_t>> run(bool match_current) {
    std::size_t n = a_.states().size();
    map_.assign(n, kNone);
    used_.assign(n, false);
    if (!assign(a_idx_.at(a_.initial()), b_idx_.at(b_.initial())) ||
        !assign(a_idx_.at(a_.error()), b_idx_.at(b_.error())))
      return std::nullopt;
    if (match_current && !assign(a_idx_.at(a_.current()), b_idx_.at(b_.current())))
      return std::nullopt;
    if (search())
      return map_;
    return std::nullopt;
  }

private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  using Sig = std::vector<EdgeKey>;
  using Edge = std::tuple<std::size_t, std::size_t, EdgeKey>;

  static void index(const Observer &o, std::map<StateId, std::size_t> &idx) {
    for (std::size_t i = 0; i < o.states().size(); ++i)
      idx.emplace(o.states()[i], i);
  }

  static std::vector<std::pair<Sig, Sig>>
  signatures(const Observer &o, const std::map<StateId, std::size_t> &idx) {
    std::vector<std::pair<Sig, Sig>> sig(o.states().size());
    for (const auto &t : o.transitions()) {
      sig[idx.at(t.source)].first.push_back(key_of(t));
      sig[idx.at(t.target)].second.push_back(key_of(t));
    }
    for (auto &[out, in] : sig) {
      std::sort(out.begin(), out.end());
      std::sort(in.begin(), in.end());
    }
    return sig;
  }

  bool assign(std::size_t sa, std::size_t sb) {
    if (map_[sa] != kNone)
      return map_[sa] == sb;
    if (used_[sb] || sig_a_[sa] != sig_b_[sb])
      return false;
    map_[sa] = sb;
    used_[sb] = true;
    return true;
  }

  bool consistent() const {
    for (const auto &t : a_.transitions()) {
      auto s = map_[a_idx_.at(t.source)];
      auto d = map_[a_idx_.at(t.target)];
      if (s != kNone && d != kNone && !b_edges_.contains({s, d, key_of(t)}))
        return false;
    }
    return true;
  }

  bool search() {
    if (!consistent())
      return false;
    auto it = std::find(map_.begin(), map_.end(), kNone);
    if (it == map_.end())
      return true;
    std::size_t sa = static_cast<std::size_t>(it - map_.begin());
    for (std::size_t sb = 0; sb < used_.size(); ++sb) {
      if (used_[sb] || sig_a_[sa] != sig_b_[sb])
        continue;
      map_[sa] = sb;
      used_[sb] = true;
      if (search())
        return true;
      map_[sa] = kNone;
      used_[sb] = false;
    }
    return false;
  }

  const Observer &a_;
  const Observer &b_;
  std::map<StateId, std::size_t> a_idx_, b_idx_;
  std::vector<std::pair<Sig, Sig>> sig_a_, sig_b_;
  std::multiset<Edge> b_edges_;
  std::vector<std::size_t> map_;
  std::vector<bool> used_;
};

} // namespace

bool isomorphic(const Observer &a, const Observer &b, IsoMode mode) {
  if (a.states().size() != b.states().size() ||
      a.transitions().size() != b.transitions().size())
    return false;
  if ((a.initial() == a.error()) != (b.initial() == b.error()))
    return false;
  bool with_run = mode == IsoMode::WithRunState;
  if (with_run && a.clock_reset_at() != b.clock_reset_at())
    return false;
  return IsoSearch(a, b).run(with_run).has_value();
}

} // namespace adaptrv
