#pragma once

#include "adaptrv/observer.hpp"
#include "adaptrv/pap_engine.hpp"
#include "adaptrv/pattern.hpp"

#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adaptrv {

enum class Verdict { Running, Violated };
enum class StepKind { Idle, Stepped, TimerFired, Adapted, ViolationDetected };

std::string_view to_string(Verdict v);
std::string_view to_string(StepKind k);

struct QueueItem {
  enum class Kind { External, Timer, Adaptation };

  Kind kind = Kind::External;
  Event event;                        // External
  TimeMs now = 0;                     // Timer
  AdaptationRule rule;                // Adaptation
  std::optional<std::size_t> target;  // Adaptation: 1-based property index

  static QueueItem external(Event ev) { return {Kind::External, std::move(ev), 0, {}, {}}; }
  static QueueItem timer(TimeMs now) { return {Kind::Timer, {}, now, {}, {}}; }
  static QueueItem adaptation(AdaptationRule r, std::optional<std::size_t> target = {}) {
    return {Kind::Adaptation, {}, 0, std::move(r), target};
  }
};

/// FIFO with safe handoff between one producer and one consumer.
class EventQueue {
public:
  void push(QueueItem item);
  std::optional<QueueItem> front() const;
  void pop();
  std::size_t size() const;
  bool empty() const { return size() == 0; }

private:
  mutable std::mutex mu_;
  std::deque<QueueItem> items_;
};

/// One deployed property: its observer and, when known, the pattern it was
/// instantiated from.
struct MonitoredProperty {
  Observer observer;
  std::optional<PatternInstance> pattern;
};

/// MTL rendering of the property, or a structural summary without a pattern.
std::string describe(const MonitoredProperty &p);

struct ViolationNotice {
  std::string session;
  std::string property;
  TimeMs timestamp = 0;
};

struct SessionEvent {
  enum class Kind { Step, Timer, Adaptation, Violation };

  Kind kind = Kind::Step;
  std::string session;
  std::vector<StateId> states; // current state of every property
  TimeMs timestamp = 0;
  std::vector<std::string> old_properties; // Adaptation only
  std::vector<std::string> new_properties; // Adaptation only
};

std::string_view to_string(SessionEvent::Kind k);

struct LogEntry {
  StepKind kind;
  TimeMs timestamp;
  std::vector<StateId> states;
};

struct RunResult {
  Verdict verdict = Verdict::Running;
  std::optional<TimeMs> violation_at;
  std::vector<LogEntry> log;
};

/// The verification loop of one deployed property (several after a split).
class MonitorSession {
public:
  MonitorSession(std::string id, const PatternInstance &p, TimeMs start = 0);
  MonitorSession(std::string id, std::vector<MonitoredProperty> props, TimeMs start = 0);

  const std::string &id() const { return id_; }

  /// Enqueues relevant events and drops the rest. Throws TimeRegression.
  void submit_event(const Event &ev);
  /// Enqueues a time advance to `now` (a clock tick). Throws TimeRegression.
  void submit_tick(TimeMs now);
  /// Enqueues an adaptation behind everything already queued. `target`
  /// selects a property when the session holds several.
  void request_adaptation(AdaptationRule rule, std::optional<std::size_t> target = {});

  /// Handles the head of the queue. Adaptation failures are rethrown after the
  /// item is dropped; the session is then unchanged.
  StepKind process_next();
  /// Processes until the queue is empty.
  void drain();

  RunResult run_virtual(const Trace &trace, bool record_log = true);

  const std::vector<MonitoredProperty> &properties() const { return props_; }
  std::set<std::string> relevant() const;
  Verdict verdict() const { return verdict_.load(); }
  std::optional<TimeMs> violation_time() const { return violation_at_; }
  std::optional<TimeMs> pending_timer() const { return pending_timer_; }
  TimeMs now() const { return now_; }
  std::size_t queued() const { return queue_.size(); }
  std::vector<StateId> current_states() const;
  std::vector<std::string> rendered_properties() const;

  void set_sink(std::function<void(const ViolationNotice &)> sink) { sink_ = std::move(sink); }
  void set_listener(std::function<void(const SessionEvent &)> l) { listener_ = std::move(l); }

private:
  void refresh();
  bool timer_due(TimeMs at) const;
  StepKind fire_timer(TimeMs at);
  StepKind after_move(bool moved, SessionEvent::Kind kind, TimeMs at, StepKind plain);
  void check_violation(TimeMs at);
  void emit(SessionEvent::Kind kind, TimeMs at, std::vector<std::string> old_props = {},
            std::vector<std::string> new_props = {});
  void adapt(const QueueItem &item);

  std::string id_;
  std::vector<MonitoredProperty> props_;
  mutable std::mutex relevant_mu_;
  std::set<std::string> relevant_;
  EventQueue queue_;
  std::optional<TimeMs> pending_timer_;
  std::optional<TimeMs> fired_at_;
  std::atomic<Verdict> verdict_{Verdict::Running};
  std::optional<TimeMs> violation_at_;
  bool notified_ = false;
  TimeMs now_ = 0;
  std::optional<TimeMs> last_submitted_;
  std::atomic<int> adaptations_queued_{0};
  std::function<void(const ViolationNotice &)> sink_;
  std::function<void(const SessionEvent &)> listener_;
};

} // namespace adaptrv
