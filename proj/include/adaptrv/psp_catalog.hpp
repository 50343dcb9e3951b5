#pragma once

#include "adaptrv/mtl.hpp"
#include "adaptrv/observer.hpp"
#include "adaptrv/pattern.hpp"

#include <set>
#include <string>
#include <string_view>

namespace adaptrv {

/// Parses a structured-English requirement.
///
///   req        := scope "," body ["."]
///   scope      := "Globally" | "Before" ID | "After" ID | "Between" ID "and" ID
///   body       := absence | recurrence | response
///   absence    := "it is never the case that" ID "holds"
///   recurrence := "it is always the case that" ID "holds at least every" DUR
///   response   := "if" ID "then in response" ID "eventually within" DUR
///                 {"followed by" ID "within" DUR}
///   DUR        := number ["s" | "ms"]        (milliseconds when no unit)
///
/// Keywords are case-insensitive; event names are kept verbatim. Throws
/// SyntaxError, UnknownPattern (body is not one of the three clause forms) or
/// InvalidPattern (an event name is reused).
PatternInstance parse_requirement(std::string_view text);

/// Canonical structured-English text; parse_requirement inverts it.
std::string render_requirement(const PatternInstance &p);

/// MTL template of the (pattern, scope) pair with placeholders substituted.
/// Throws UnsupportedCombination.
MtlFormula to_mtl(const PatternInstance &p);

/// Deterministic observer for the instance, validated, in its initial state
/// with an unset clock. Throws UnsupportedCombination or
/// TemplateValidationError.
Observer instantiate_observer(const PatternInstance &p);

std::set<std::string> relevant_event_types(const PatternInstance &p);

/// Throws UnsupportedCombination unless the pair is in the supported matrix.
void require_supported(const PatternInstance &p);

} // namespace adaptrv
