#include "adaptrv/rv_engine.hpp"

#include "adaptrv/error.hpp"
#include "adaptrv/psp_catalog.hpp"

#include <algorithm>

namespace adaptrv {

std::string_view to_string(Verdict v) {
  return v == Verdict::Running ? "Running" : "Violated";
}

std::string_view to_string(StepKind k) {
  switch (k) {
  case StepKind::Idle: return "Idle";
  case StepKind::Stepped: return "Stepped";
  case StepKind::TimerFired: return "TimerFired";
  case StepKind::Adapted: return "Adapted";
  case StepKind::ViolationDetected: return "ViolationDetected";
  }
  return "?";
}

std::string_view to_string(SessionEvent::Kind k) {
  switch (k) {
  case SessionEvent::Kind::Step: return "step";
  case SessionEvent::Kind::Timer: return "timer";
  case SessionEvent::Kind::Adaptation: return "adaptation";
  case SessionEvent::Kind::Violation: return "violation";
  }
  return "?";
}

void EventQueue::push(QueueItem item) {
  std::lock_guard lock(mu_);
  items_.push_back(std::move(item));
}

std::optional<QueueItem> EventQueue::front() const {
  std::lock_guard lock(mu_);
  if (items_.empty())
    return std::nullopt;
  return items_.front();
}

void EventQueue::pop() {
  std::lock_guard lock(mu_);
  if (!items_.empty())
    items_.pop_front();
}

std::size_t EventQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::string describe(const MonitoredProperty &p) {
  if (p.pattern)
    return render(to_mtl(*p.pattern));
  return "observer(" + std::to_string(p.observer.states().size()) + " states, " +
         std::to_string(p.observer.transitions().size()) + " transitions)";
}

MonitorSession::MonitorSession(std::string id, const PatternInstance &p, TimeMs start)
    : MonitorSession(std::move(id), {{instantiate_observer(p), p}}, start) {}

MonitorSession::MonitorSession(std::string id, std::vector<MonitoredProperty> props,
                               TimeMs start)
    : id_(std::move(id)), props_(std::move(props)), now_(start) {
  for (auto &prop : props_) {
    if (!prop.observer.clock_reset_at())
      prop.observer.reset_clock(start);
    if (prop.observer.last_time())
      now_ = std::max(now_, *prop.observer.last_time());
  }
  refresh();
  for (const auto &prop : props_)
    if (prop.observer.violated()) {
      verdict_ = Verdict::Violated;
      notified_ = true;
    }
}

void MonitorSession::refresh() {
  std::set<std::string> relevant;
  pending_timer_.reset();
  for (const auto &prop : props_) {
    if (prop.pattern) {
      auto names = relevant_event_types(*prop.pattern);
      relevant.insert(names.begin(), names.end());
    } else {
      for (const auto &t : prop.observer.transitions())
        if (t.label)
          relevant.insert(*t.label);
    }
    if (auto t = prop.observer.next_timer(); t && (!pending_timer_ || *t < *pending_timer_))
      pending_timer_ = t;
  }
  std::lock_guard lock(relevant_mu_);
  relevant_ = std::move(relevant);
}

std::set<std::string> MonitorSession::relevant() const {
  std::lock_guard lock(relevant_mu_);
  return relevant_;
}

// A timer that already fired without effect is not fired again.
bool MonitorSession::timer_due(TimeMs at) const {
  return pending_timer_ && *pending_timer_ <= at && (!fired_at_ || *pending_timer_ > *fired_at_);
}

std::vector<StateId> MonitorSession::current_states() const {
  std::vector<StateId> out;
  for (const auto &prop : props_)
    out.push_back(prop.observer.current());
  return out;
}

std::vector<std::string> MonitorSession::rendered_properties() const {
  std::vector<std::string> out;
  for (const auto &prop : props_)
    out.push_back(describe(prop));
  return out;
}

void MonitorSession::submit_event(const Event &ev) {
  if (last_submitted_ && ev.timestamp < *last_submitted_)
    throw Error(ErrorCode::TimeRegression, "event at " + std::to_string(ev.timestamp) +
                                               " precedes " +
                                               std::to_string(*last_submitted_));
  last_submitted_ = ev.timestamp;
  // While an adaptation is pending the relevant set may still change, so the
  // observers do the filtering.
  bool relevant = adaptations_queued_.load() > 0;
  if (!relevant) {
    std::lock_guard lock(relevant_mu_);
    relevant = relevant_.contains(ev.type);
  }
  if (relevant)
    queue_.push(QueueItem::external(ev));
}

void MonitorSession::submit_tick(TimeMs now) {
  if (last_submitted_ && now < *last_submitted_)
    throw Error(ErrorCode::TimeRegression, "tick at " + std::to_string(now) +
                                               " precedes " +
                                               std::to_string(*last_submitted_));
  last_submitted_ = now;
  queue_.push(QueueItem::timer(now));
}

void MonitorSession::request_adaptation(AdaptationRule rule,
                                        std::optional<std::size_t> target) {
  ++adaptations_queued_;
  queue_.push(QueueItem::adaptation(std::move(rule), target));
}

void MonitorSession::emit(SessionEvent::Kind kind, TimeMs at,
                          std::vector<std::string> old_props,
                          std::vector<std::string> new_props) {
  if (!listener_)
    return;
  listener_({kind, id_, current_states(), at, std::move(old_props), std::move(new_props)});
}

void MonitorSession::check_violation(TimeMs at) {
  if (notified_)
    return;
  for (std::size_t i = 0; i < props_.size(); ++i) {
    if (!props_[i].observer.violated())
      continue;
    notified_ = true;
    violation_at_ = at;
    verdict_ = Verdict::Violated;
    emit(SessionEvent::Kind::Violation, at);
    if (sink_)
      sink_({id_, describe(props_[i]), at});
    return;
  }
}

StepKind MonitorSession::after_move(bool moved, SessionEvent::Kind kind, TimeMs at,
                                    StepKind plain) {
  bool was_violated = notified_;
  if (moved) {
    refresh();
    emit(kind, at);
  }
  check_violation(at);
  return !was_violated && notified_ ? StepKind::ViolationDetected : plain;
}

StepKind MonitorSession::fire_timer(TimeMs at) {
  bool moved = false;
  for (auto &prop : props_)
    moved |= prop.observer.advance_time(at).taken;
  now_ = std::max(now_, at);
  fired_at_ = at;
  if (!moved)
    refresh();
  return after_move(moved, SessionEvent::Kind::Timer, at, StepKind::TimerFired);
}

StepKind MonitorSession::process_next() {
  auto item = queue_.front();
  if (!item)
    return StepKind::Idle;
  switch (item->kind) {
  case QueueItem::Kind::External: {
    if (timer_due(item->event.timestamp - 1))
      return fire_timer(*pending_timer_);
    queue_.pop();
    bool moved = false;
    for (auto &prop : props_)
      moved |= prop.observer.step(item->event).taken;
    now_ = std::max(now_, item->event.timestamp);
    return after_move(moved, SessionEvent::Kind::Step, item->event.timestamp,
                      StepKind::Stepped);
  }
  case QueueItem::Kind::Timer: {
    if (timer_due(item->now))
      return fire_timer(*pending_timer_);
    queue_.pop();
    bool moved = false;
    for (auto &prop : props_)
      moved |= prop.observer.advance_time(item->now).taken;
    now_ = std::max(now_, item->now);
    return after_move(moved, SessionEvent::Kind::Timer, item->now, StepKind::Stepped);
  }
  case QueueItem::Kind::Adaptation: {
    queue_.pop();
    --adaptations_queued_;
    adapt(*item);
    return StepKind::Adapted;
  }
  }
  return StepKind::Idle;
}

void MonitorSession::adapt(const QueueItem &item) {
  using K = AdaptationRule::Kind;
  const AdaptationRule &rule = item.rule;
  const bool structural =
      rule.kind == K::AddResponse || rule.kind == K::RemoveResponse || rule.kind == K::SplitChain;

  std::vector<std::size_t> targets;
  if (item.target) {
    if (*item.target < 1 || *item.target > props_.size())
      throw Error(ErrorCode::BadIndex, "session " + id_ + " has no property " +
                                           std::to_string(*item.target));
    targets.push_back(*item.target - 1);
  } else if (props_.size() == 1) {
    targets.push_back(0);
  } else if (structural) {
    throw Error(ErrorCode::BadIndex, "session " + id_ + " holds " +
                                         std::to_string(props_.size()) +
                                         " properties; name one as <session>.<k>");
  } else {
    for (std::size_t i = 0; i < props_.size(); ++i) {
      const auto &p = props_[i].pattern;
      if (!p)
        continue;
      if (rule.kind == K::UpdateTimeGuard && p->pattern != PatternKind::Absence)
        targets.push_back(i);
      if (rule.kind == K::UpdateEvent) {
        auto names = event_names(*p);
        if (std::find(names.begin(), names.end(), rule.old_name) != names.end())
          targets.push_back(i);
      }
    }
    if (targets.empty())
      throw Error(rule.kind == K::UpdateEvent ? ErrorCode::UnknownEvent : ErrorCode::NoTimeBound,
                  "no property of session " + id_ + " is affected by " + to_command(rule));
  }

  // Compute every outcome before committing anything.
  std::vector<AdaptationOutcome> outcomes;
  for (auto i : targets) {
    const auto &prop = props_[i];
    if (!prop.pattern)
      throw Error(ErrorCode::WrongPattern, "property has no pattern to adapt");
    outcomes.push_back(apply(prop.observer, *prop.pattern, rule));
  }

  auto old_props = rendered_properties();
  std::vector<MonitoredProperty> next;
  for (std::size_t i = 0, k = 0; i < props_.size(); ++i) {
    if (k < targets.size() && targets[k] == i) {
      for (auto &ap : outcomes[k].properties)
        next.push_back({std::move(ap.observer), std::move(ap.pattern)});
      ++k;
    } else {
      next.push_back(std::move(props_[i]));
    }
  }
  props_ = std::move(next);

  // A shrunk bound may already be exceeded.
  for (auto &prop : props_)
    prop.observer.advance_time(std::max(now_, prop.observer.last_time().value_or(now_)));
  refresh();
  emit(SessionEvent::Kind::Adaptation, now_, std::move(old_props), rendered_properties());
  check_violation(now_);
}

void MonitorSession::drain() {
  while (process_next() != StepKind::Idle) {
  }
}

RunResult MonitorSession::run_virtual(const Trace &trace, bool record_log) {
  RunResult result;
  auto pump = [&] {
    for (;;) {
      StepKind k = process_next();
      if (k == StepKind::Idle)
        break;
      if (record_log)
        result.log.push_back({k, now_, current_states()});
    }
  };
  for (const auto &ev : trace) {
    submit_event(ev);
    pump();
  }
  if (!trace.empty()) {
    submit_tick(horizon(trace));
    pump();
  }
  result.verdict = verdict();
  result.violation_at = violation_at_;
  return result;
}

} // namespace adaptrv
