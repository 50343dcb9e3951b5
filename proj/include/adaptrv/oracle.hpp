#pragma once

#include "adaptrv/event.hpp"
#include "adaptrv/mtl.hpp"
#include "adaptrv/pattern.hpp"

#include <optional>
#include <string>

namespace adaptrv {

struct OracleVerdict {
  enum Kind { SatisfiedSoFar, Violated, Inconclusive };

  Kind kind = SatisfiedSoFar;
  std::optional<TimeMs> at; // set for Violated

  static OracleVerdict satisfied() { return {}; }
  static OracleVerdict violated(TimeMs t) { return {Violated, t}; }
  static OracleVerdict inconclusive() { return {Inconclusive, std::nullopt}; }

  bool operator==(const OracleVerdict &) const = default;
};

std::string to_string(const OracleVerdict &v);

struct OracleOptions {
  /// Classical reading of the (Q ∧ ◊R) antecedent: a violation inside a
  /// scope segment only counts once the segment is closed by R.
  bool classical_scope = false;
};

/// Recovers the pattern instance whose template produced `f` (after
/// normalization). Throws Error(UnsupportedFormula).
PatternInstance decompile(const MtlFormula &f);

/// Finite-trace verdict of `f` over `trace`. Time passes up to the last
/// event's timestamp; obligations still open at that point are Inconclusive.
OracleVerdict evaluate(const MtlFormula &f, const Trace &trace,
                       OracleOptions options = {});

/// Same evaluation on an already decompiled instance.
OracleVerdict evaluate(const PatternInstance &p, const Trace &trace,
                       OracleOptions options = {});

} // namespace adaptrv
