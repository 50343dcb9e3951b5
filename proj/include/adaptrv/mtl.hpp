#pragma once

#include "adaptrv/event.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adaptrv {

/// Closed time window [lo, hi] in milliseconds, 0 <= lo <= hi.
struct Bound {
  TimeMs lo = 0;
  TimeMs hi = 0;

  bool operator==(const Bound &) const = default;
};

/// Future-MTL syntax tree. Immutable value type; And/Or are n-ary.
class MtlFormula {
public:
  enum class Op { Atom, Not, And, Or, Implies, Globally, Eventually, Until };

  static MtlFormula atom(std::string name);
  static MtlFormula negation(MtlFormula f);
  static MtlFormula conjunction(std::vector<MtlFormula> operands);
  static MtlFormula disjunction(std::vector<MtlFormula> operands);
  static MtlFormula implies(MtlFormula lhs, MtlFormula rhs);
  static MtlFormula globally(MtlFormula f);
  static MtlFormula eventually(MtlFormula f, std::optional<Bound> bound = {});
  static MtlFormula until(MtlFormula lhs, MtlFormula rhs,
                          std::optional<Bound> bound = {});

  Op op() const { return op_; }
  /// Event name; only meaningful for Atom.
  const std::string &name() const { return name_; }
  const std::vector<MtlFormula> &children() const { return children_; }
  const MtlFormula &child(std::size_t i = 0) const { return children_.at(i); }
  const std::optional<Bound> &bound() const { return bound_; }

  bool is_atom() const { return op_ == Op::Atom; }

  bool operator==(const MtlFormula &) const = default;

private:
  MtlFormula(Op op, std::string name, std::vector<MtlFormula> children,
             std::optional<Bound> bound);

  Op op_ = Op::Atom;
  std::string name_;
  std::vector<MtlFormula> children_;
  std::optional<Bound> bound_;
};

enum class MtlStyle {
  Unicode, // □ ◊ ¬ ∧ ∨ → U
  Ascii,   // G F ! & | -> U
};

/// Renders with the parenthesization used for the pattern templates. Time
/// bounds are printed in seconds ([0,2] is 2000 ms).
std::string render(const MtlFormula &f, MtlStyle style = MtlStyle::Unicode);

/// Accepts both styles; throws SyntaxError.
MtlFormula parse_mtl(std::string_view text);

/// Flattens nested And/Or so structurally equal formulas compare equal.
MtlFormula normalize(const MtlFormula &f);

std::set<std::string> atoms(const MtlFormula &f);

} // namespace adaptrv
