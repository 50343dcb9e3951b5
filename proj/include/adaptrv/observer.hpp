#pragma once

#include "adaptrv/event.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adaptrv {

using StateId = std::string;

enum class GuardOp {
  AtMost,  // c <= bound
  Exceeds, // c > bound
};

struct Guard {
  GuardOp op = GuardOp::AtMost;
  TimeMs bound_ms = 0;

  bool holds(TimeMs valuation) const {
    return op == GuardOp::AtMost ? valuation <= bound_ms : valuation > bound_ms;
  }

  bool operator==(const Guard &) const = default;
};

struct Transition {
  StateId source;
  StateId target;
  std::optional<std::string> label; // unlabeled transitions must be guarded
  std::optional<Guard> guard;
  bool reset = false;

  bool operator==(const Transition &) const = default;
};

struct StepResult {
  bool taken = false;
  StateId new_state;
  bool entered_error = false;
};

enum class IssueKind {
  UnknownState,
  ErrorNotAbsorbing,
  UnguardedUnlabeled,
  NegativeBound,
  Nondeterminism,
  DuplicateState,
};

std::string_view to_string(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  StateId state;
  std::string detail;
};

/// Deterministic timed automaton with one clock and an absorbing error state.
///
/// The clock is unset until the first reset; an unset clock reads as 0, so
/// `c <= t` guards hold and `c > t` guards do not.
class Observer {
public:
  Observer() = default;
  Observer(std::vector<StateId> states, StateId initial, StateId error,
           std::vector<Transition> transitions);

  const std::vector<StateId> &states() const { return states_; }
  const StateId &initial() const { return initial_; }
  const StateId &error() const { return error_; }
  const std::vector<Transition> &transitions() const { return transitions_; }

  const StateId &current() const { return states_.at(current_); }
  std::optional<TimeMs> clock_reset_at() const { return clock_reset_at_; }
  std::optional<TimeMs> last_time() const { return last_time_; }
  bool violated() const { return current_ == error_index_; }

  bool has_state(std::string_view s) const { return find_state(s).has_value(); }
  /// Indices into transitions() of the transitions leaving `s`.
  std::vector<std::size_t> outgoing(std::string_view s) const;

  /// Processes one event: takes the unique enabled transition labeled with
  /// the event type, then settles unlabeled transitions at the same instant.
  StepResult step(const Event &ev);

  /// Takes enabled unlabeled (timed) transitions at instant `now`.
  StepResult advance_time(TimeMs now);

  /// Earliest absolute instant at which an unlabeled transition of the
  /// current state becomes enabled; none while the clock is unset.
  std::optional<TimeMs> next_timer() const;

  // Run-state manipulation used by deployment and adaptation.
  void reset_clock(TimeMs at) { clock_reset_at_ = at; }
  void set_run_state(const StateId &current, std::optional<TimeMs> clock_reset_at,
                     std::optional<TimeMs> last_time);

  // Structural edits; the index is rebuilt after each call.
  void add_state(const StateId &s);
  void remove_state(const StateId &s); // drops its incident transitions
  void rename_state(const StateId &from, const StateId &to);
  void add_transition(Transition t);
  Transition &transition(std::size_t i) { return transitions_.at(i); }
  void remove_transitions_if(const std::function<bool(const Transition &)> &pred);
  void reindex();

  bool operator==(const Observer &other) const;

private:
  std::optional<std::uint32_t> find_state(std::string_view s) const;
  std::uint32_t state_index(std::string_view s) const;
  auto outgoing_of(std::uint32_t s) const {
    struct Range {
      const std::uint32_t *b, *e;
      const std::uint32_t *begin() const { return b; }
      const std::uint32_t *end() const { return e; }
    };
    return Range{out_edges_.data() + out_begin_[s], out_edges_.data() + out_begin_[s + 1]};
  }
  TimeMs valuation(TimeMs now) const {
    return clock_reset_at_ ? now - *clock_reset_at_ : 0;
  }
  void check_time(TimeMs now) const;
  void take(const Transition &t, TimeMs now);
  bool settle(TimeMs now);

  std::vector<StateId> states_;
  StateId initial_;
  StateId error_;
  std::vector<Transition> transitions_;

  // Outgoing transitions of state i are out_edges_[out_begin_[i] .. out_begin_[i+1]).
  std::vector<std::uint32_t> out_begin_;
  std::vector<std::uint32_t> out_edges_;
  std::vector<std::uint32_t> targets_;
  std::uint32_t error_index_ = 0;

  std::uint32_t current_ = 0;
  std::optional<TimeMs> clock_reset_at_;
  std::optional<TimeMs> last_time_;
};

/// Empty iff states are well-formed, the error state is absorbing, guards are
/// well-formed and no two transitions of a state are simultaneously enabled
/// for any label (or no label) at any boundary valuation {0, t, t+1}.
std::vector<ValidationIssue> validate(const Observer &obs);

/// The same checks restricted to the outgoing transitions of `states`; used
/// after an edit that only touched those states of a valid observer.
std::vector<ValidationIssue> validate(const Observer &obs, const std::vector<StateId> &states);

enum class IsoMode { Structure, WithRunState };

/// Label-, guard- and reset-preserving graph isomorphism mapping initial to
/// initial and error to error. State names are ignored. WithRunState also
/// requires current states to correspond and clock readings to be equal.
bool isomorphic(const Observer &a, const Observer &b,
                IsoMode mode = IsoMode::Structure);

} // namespace adaptrv
