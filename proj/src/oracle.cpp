#include "adaptrv/oracle.hpp"

#include "adaptrv/error.hpp"

namespace adaptrv {

namespace {

using Op = MtlFormula::Op;

[[noreturn]] void unsupported(const MtlFormula &f) {
  throw Error(ErrorCode::UnsupportedFormula,
              "formula is outside the pattern fragment: " + render(f));
}

bool is(const MtlFormula &f, Op op, std::size_t arity) {
  return f.op() == op && f.children().size() == arity;
}

const std::string &atom_name(const MtlFormula &f) {
  if (!f.is_atom())
    unsupported(f);
  return f.name();
}

// ¬x with x an atom
const std::string &negated_atom(const MtlFormula &f) {
  if (!is(f, Op::Not, 1))
    unsupported(f);
  return atom_name(f.child());
}

TimeMs window(const MtlFormula &f) {
  if (!f.bound() || f.bound()->lo != 0)
    unsupported(f);
  return f.bound()->hi;
}

void require_unbounded(const MtlFormula &f) {
  if (f.bound())
    unsupported(f);
}

// ◊R unbounded
const std::string &eventually_atom(const MtlFormula &f) {
  if (!is(f, Op::Eventually, 1))
    unsupported(f);
  require_unbounded(f);
  return atom_name(f.child());
}

PatternInstance decompile_response(Scope scope, const MtlFormula &body) {
  // P → (¬R U[0,t1] chain)
  if (!is(body, Op::Implies, 2))
    unsupported(body);
  std::string trigger = atom_name(body.child(0));
  const MtlFormula &u = body.child(1);
  if (!is(u, Op::Until, 2) || negated_atom(u.child(0)) != scope.close)
    unsupported(u);
  std::vector<TimedResponse> responses;
  const MtlFormula &chain = u.child(1);
  if (chain.is_atom()) {
    responses.push_back({chain.name(), window(u)});
  } else {
    const auto &ops = chain.children();
    if (chain.op() != Op::And || ops.size() < 3 || ops.size() % 2 == 0)
      unsupported(chain);
    responses.push_back({atom_name(ops[0]), window(u)});
    for (std::size_t i = 1; i < ops.size(); i += 2) {
      if (negated_atom(ops[i]) != scope.close || !is(ops[i + 1], Op::Eventually, 1))
        unsupported(chain);
      responses.push_back({atom_name(ops[i + 1].child()), window(ops[i + 1])});
    }
  }
  return PatternInstance::response(std::move(scope), std::move(trigger),
                                   std::move(responses));
}

PatternInstance decompile_between(const MtlFormula &antecedent,
                                  const MtlFormula &consequent) {
  if (!is(antecedent, Op::And, 2))
    unsupported(antecedent);
  Scope scope = Scope::between(atom_name(antecedent.child(0)),
                               eventually_atom(antecedent.child(1)));
  if (!is(consequent, Op::Until, 2) || consequent.bound() ||
      atom_name(consequent.child(1)) != scope.close)
    unsupported(consequent);
  const MtlFormula &left = consequent.child(0);
  if (left.op() == Op::Not)
    return PatternInstance::absence(scope, negated_atom(left));
  if (is(left, Op::Eventually, 1)) {
    const MtlFormula &d = left.child();
    if (!is(d, Op::Or, 2) || atom_name(d.child(1)) != scope.close)
      unsupported(left);
    return PatternInstance::recurrence(scope, atom_name(d.child(0)), window(left));
  }
  return decompile_response(std::move(scope), left);
}

// Scope bookkeeping shared by the pattern evaluators.
class ScopeTracker {
public:
  explicit ScopeTracker(const Scope &s) : s_(s) {
    open_ = s.kind == ScopeKind::Globally || s.kind == ScopeKind::Before;
  }

  bool open() const { return open_; }
  bool opens_on(const std::string &ev) const {
    return !open_ && !done_ && s_.has_open() && ev == s_.open;
  }
  bool closes_on(const std::string &ev) const {
    return open_ && s_.has_close() && ev == s_.close;
  }
  void enter() { open_ = true; }
  void leave() {
    open_ = false;
    if (s_.kind == ScopeKind::Before)
      done_ = true;
  }

private:
  const Scope &s_;
  bool open_ = false;
  bool done_ = false;
};

// Outcome under observer semantics plus the trace index from which the
// closing R has to be searched for the classical reading.
struct Finding {
  OracleVerdict verdict;
  std::size_t resume = 0;
  bool awaits_close = false; // violation happened inside an R-closable segment
};

Finding absence(const PatternInstance &p, const Trace &trace) {
  ScopeTracker scope(p.scope);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto &ev = trace[i];
    if (scope.open() && ev.type == *p.subject)
      return {OracleVerdict::violated(ev.timestamp), i, p.scope.has_close()};
    if (scope.opens_on(ev.type))
      scope.enter();
    else if (scope.closes_on(ev.type))
      scope.leave();
  }
  return {};
}

Finding recurrence(const PatternInstance &p, const Trace &trace) {
  const TimeMs t = *p.recurrence_period_ms;
  const bool closable = p.scope.has_close();
  ScopeTracker scope(p.scope);
  TimeMs anchor = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto &ev = trace[i];
    if (scope.open() && ev.timestamp > anchor + t)
      return {OracleVerdict::violated(anchor + t + 1), i, closable};
    if (scope.opens_on(ev.type)) {
      scope.enter();
      anchor = ev.timestamp;
    } else if (scope.closes_on(ev.type)) {
      scope.leave();
    } else if (scope.open() && ev.type == *p.subject) {
      anchor = ev.timestamp;
    }
  }
  TimeMs horizon_ms = horizon(trace);
  if (scope.open() && anchor + t < horizon_ms)
    return {OracleVerdict::violated(anchor + t + 1), trace.size(), closable};
  return {};
}

Finding response(const PatternInstance &p, const Trace &trace) {
  const auto &rs = p.responses;
  const bool closable = p.scope.has_close();
  ScopeTracker scope(p.scope);
  std::size_t stage = 0; // 0: idle, j: awaiting responses[j-1]
  TimeMs anchor = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto &ev = trace[i];
    if (stage > 0) {
      TimeMs deadline = anchor + rs[stage - 1].deadline_ms;
      if (ev.timestamp > deadline)
        return {OracleVerdict::violated(deadline + 1), i, closable};
      if (ev.type == rs[stage - 1].event) {
        anchor = ev.timestamp;
        stage = stage == rs.size() ? 0 : stage + 1;
      } else if (scope.closes_on(ev.type)) {
        return {OracleVerdict::violated(ev.timestamp), i, closable};
      }
      continue;
    }
    if (scope.opens_on(ev.type)) {
      scope.enter();
    } else if (scope.closes_on(ev.type)) {
      scope.leave();
    } else if (scope.open() && ev.type == *p.trigger) {
      stage = 1;
      anchor = ev.timestamp;
    }
  }
  if (stage > 0) {
    TimeMs deadline = anchor + rs[stage - 1].deadline_ms;
    if (deadline < horizon(trace))
      return {OracleVerdict::violated(deadline + 1), trace.size(), closable};
    return {OracleVerdict::inconclusive()};
  }
  return {};
}

} // namespace

std::string to_string(const OracleVerdict &v) {
  switch (v.kind) {
  case OracleVerdict::SatisfiedSoFar: return "satisfied";
  case OracleVerdict::Violated: return "violated@" + std::to_string(*v.at);
  case OracleVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

PatternInstance decompile(const MtlFormula &formula) {
  MtlFormula f = normalize(formula);
  PatternInstance p = [&]() -> PatternInstance {
    if (is(f, Op::Implies, 2)) {
      // ◊R → ¬P U R
      std::string r = eventually_atom(f.child(0));
      const MtlFormula &u = f.child(1);
      if (!is(u, Op::Until, 2) || u.bound() || atom_name(u.child(1)) != r)
        unsupported(f);
      return PatternInstance::absence(Scope::before(r), negated_atom(u.child(0)));
    }
    if (!is(f, Op::Globally, 1))
      unsupported(f);
    const MtlFormula &g = f.child();
    if (g.op() == Op::Not)
      return PatternInstance::absence(Scope::globally(), negated_atom(g));
    if (is(g, Op::Eventually, 1))
      return PatternInstance::recurrence(Scope::globally(), atom_name(g.child()),
                                         window(g));
    if (!is(g, Op::Implies, 2))
      unsupported(f);
    const MtlFormula &lhs = g.child(0);
    const MtlFormula &rhs = g.child(1);
    if (lhs.is_atom() && is(rhs, Op::Globally, 1))
      return PatternInstance::absence(Scope::after(lhs.name()),
                                      negated_atom(rhs.child()));
    if (lhs.is_atom() && is(rhs, Op::Eventually, 1))
      return PatternInstance::response(Scope::globally(), lhs.name(),
                                       {{atom_name(rhs.child()), window(rhs)}});
    return decompile_between(lhs, rhs);
  }();
  if (auto why = check_invariants(p); !why.empty())
    throw Error(ErrorCode::UnsupportedFormula, why);
  if (!is_supported(p.pattern, p.scope.kind))
    unsupported(f);
  return p;
}

OracleVerdict evaluate(const MtlFormula &f, const Trace &trace, OracleOptions options) {
  return evaluate(decompile(f), trace, options);
}

OracleVerdict evaluate(const PatternInstance &p, const Trace &trace,
                       OracleOptions options) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].timestamp < trace[i - 1].timestamp)
      throw Error(ErrorCode::TimeRegression, "trace timestamps decrease at position " +
                                                 std::to_string(i));
  Finding found = [&] {
    switch (p.pattern) {
    case PatternKind::Absence: return absence(p, trace);
    case PatternKind::Recurrence: return recurrence(p, trace);
    case PatternKind::Response:
    case PatternKind::ResponseChain: return response(p, trace);
    }
    return Finding{};
  }();
  if (!options.classical_scope || !p.scope.has_close())
    return found.verdict;
  if (found.verdict.kind == OracleVerdict::Violated) {
    if (!found.awaits_close)
      return found.verdict;
    for (std::size_t i = found.resume; i < trace.size(); ++i)
      if (trace[i].type == p.scope.close)
        return OracleVerdict::violated(std::max(*found.verdict.at, trace[i].timestamp));
    return OracleVerdict::inconclusive();
  }
  return found.verdict;
}

} // namespace adaptrv
