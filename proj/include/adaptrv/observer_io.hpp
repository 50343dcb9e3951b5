#pragma once

#include "adaptrv/observer.hpp"
#include "adaptrv/pattern.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace adaptrv {

/// An observer file: the automaton, its run state and optionally the
/// requirement it was instantiated from.
struct ObserverDocument {
  Observer observer;
  std::optional<PatternInstance> pattern;
};

nlohmann::json observer_to_json(const Observer &obs, bool with_run_state = true);

/// Reads the structure and, when present, the run state. Throws
/// Error(ParseError) on malformed documents.
Observer observer_from_json(const nlohmann::json &j);

nlohmann::json document_to_json(const ObserverDocument &doc);
ObserverDocument document_from_json(const nlohmann::json &j);

void save_document(const std::filesystem::path &path, const ObserverDocument &doc);
ObserverDocument load_document(const std::filesystem::path &path);

} // namespace adaptrv
