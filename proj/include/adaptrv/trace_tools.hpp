#pragma once

#include "adaptrv/event.hpp"
#include "adaptrv/pattern.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace adaptrv {

enum class TraceLabel { Satisfying, Violating };

std::string_view to_string(TraceLabel label);
/// Accepts "sat"/"satisfying" and "viol"/"violating".
TraceLabel parse_label(std::string_view text);

/// A trace of roughly `approx_length` events whose oracle verdict matches
/// `label` (SatisfiedSoFar or Violated). Violating traces rotate through
/// missing responses, late responses and early scope ends depending on the
/// seed. Throws Error(GenerationFailure).
Trace generate(const PatternInstance &p, TraceLabel label, std::uint64_t seed,
               std::size_t approx_length = 60);

/// `<timestamp_ms> <event_type>` per line; `#` starts a comment line.
Trace parse_trace(std::istream &in);
void format_trace(std::ostream &out, const Trace &trace);

Trace read_trace(const std::filesystem::path &path);
void write_trace(const Trace &trace, const std::filesystem::path &path);

} // namespace adaptrv
