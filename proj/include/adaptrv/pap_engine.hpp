#pragma once

#include "adaptrv/observer.hpp"
#include "adaptrv/pattern.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adaptrv {

struct AdaptationRule {
  enum class Kind { UpdateTimeGuard, UpdateEvent, AddResponse, RemoveResponse, SplitChain };

  Kind kind = Kind::UpdateTimeGuard;
  TimeMs bound_ms = 0;              // UpdateTimeGuard, AddResponse
  std::optional<std::size_t> index; // 1-based; UpdateTimeGuard (optional), RemoveResponse
  std::string old_name;             // UpdateEvent
  std::string new_name;             // UpdateEvent, AddResponse (the added event)

  static AdaptationRule update_time_guard(TimeMs bound, std::optional<std::size_t> which = {});
  static AdaptationRule update_event(std::string from, std::string to);
  static AdaptationRule add_response(std::string event, TimeMs bound);
  static AdaptationRule remove_response(std::size_t index);
  static AdaptationRule split_chain();

  bool operator==(const AdaptationRule &) const = default;
};

std::string_view to_string(AdaptationRule::Kind kind);

/// Command form, e.g. "ADD_RESPONSE glucose_reply 2000".
std::string to_command(const AdaptationRule &rule);

/// Parses the command form; throws Error(BadCommand).
AdaptationRule parse_adaptation(std::string_view text);

struct AdaptedProperty {
  Observer observer;
  PatternInstance pattern;
};

struct AdaptationOutcome {
  std::vector<AdaptedProperty> properties; // one entry except for SplitChain
  std::string state_map;                   // e.g. "waiting_1 -> waiting_2"
  /// States whose outgoing transitions the rule rewrote; the rest of the
  /// observer is unchanged. Empty for freshly instantiated outputs.
  std::vector<StateId> changed_states;
};

AdaptationOutcome update_time_guard(const Observer &obs, const PatternInstance &p,
                                    const AdaptationRule &rule);
AdaptationOutcome update_event(const Observer &obs, const PatternInstance &p,
                               const AdaptationRule &rule);
AdaptationOutcome add_response(const Observer &obs, const PatternInstance &p,
                               const AdaptationRule &rule);
AdaptationOutcome remove_response(const Observer &obs, const PatternInstance &p,
                                  const AdaptationRule &rule);
AdaptationOutcome split_chain(const Observer &obs, const PatternInstance &p,
                              const AdaptationRule &rule);

/// Dispatches on the rule kind and validates every output observer. Inputs
/// are never modified; on error nothing has changed.
AdaptationOutcome apply(const Observer &obs, const PatternInstance &p,
                        const AdaptationRule &rule);

} // namespace adaptrv
