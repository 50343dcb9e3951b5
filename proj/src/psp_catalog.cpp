#include "adaptrv/psp_catalog.hpp"

#include "adaptrv/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace adaptrv {

namespace {

// ---------------------------------------------------------------------------
// Structured English

struct Word {
  enum Kind { Ident, Number, Comma, Period, End } kind = End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Word> tokenize(std::string_view text) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == ',') {
      out.push_back({Word::Comma, ",", start});
      ++i;
    } else if (c == '.') {
      out.push_back({Word::Period, ".", start});
      ++i;
    } else if (std::isdigit(c)) {
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '.') &&
             !(text[i] == '.' && (i + 1 >= text.size() ||
                                  !std::isdigit(static_cast<unsigned char>(text[i + 1])))))
        ++i;
      out.push_back({Word::Number, std::string(text.substr(start, i - start)), start});
    } else if (std::isalpha(c) || c == '_') {
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        ++i;
      out.push_back({Word::Ident, std::string(text.substr(start, i - start)), start});
    } else {
      std::size_t len = 1;
      while (start + len < text.size() &&
             (static_cast<unsigned char>(text[start + len]) & 0xC0) == 0x80)
        ++len;
      throw SyntaxError(start, {"word", "number", "','"},
                        std::string(text.substr(start, len)));
    }
  }
  out.push_back({Word::End, {}, text.size()});
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

class RequirementParser {
public:
  explicit RequirementParser(std::string_view text)
      : text_(text), words_(tokenize(text)) {}

  PatternInstance parse() {
    Scope scope = parse_scope();
    expect_comma();
    PatternInstance p = parse_body(std::move(scope));
    if (peek().kind == Word::Period)
      ++at_;
    if (peek().kind != Word::End)
      fail({"end of requirement"});
    require_valid(p);
    return p;
  }

private:
  const Word &peek(std::size_t ahead = 0) const {
    return words_[std::min(at_ + ahead, words_.size() - 1)];
  }

  bool is_keyword(const Word &w, std::string_view kw) const {
    return w.kind == Word::Ident && iequals(w.text, kw);
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SyntaxError(peek().pos, std::move(expected), peek().text);
  }

  void keyword(std::string_view kw) {
    if (!is_keyword(peek(), kw))
      fail({"'" + std::string(kw) + "'"});
    ++at_;
  }

  void keywords(std::initializer_list<std::string_view> kws) {
    for (auto kw : kws)
      keyword(kw);
  }

  std::string ident(const char *role) {
    if (peek().kind != Word::Ident)
      fail({role});
    return words_[at_++].text;
  }

  void expect_comma() {
    if (peek().kind != Word::Comma)
      fail({"','"});
    ++at_;
  }

  TimeMs duration() {
    if (peek().kind != Word::Number)
      fail({"duration"});
    const Word &w = words_[at_++];
    std::size_t digits_end = 0;
    while (digits_end < w.text.size() &&
           (std::isdigit(static_cast<unsigned char>(w.text[digits_end])) ||
            w.text[digits_end] == '.'))
      ++digits_end;
    std::string number = w.text.substr(0, digits_end);
    std::string unit = w.text.substr(digits_end);
    if (unit.empty() && (is_keyword(peek(), "s") || is_keyword(peek(), "ms")))
      unit = words_[at_++].text;
    double scale = 1.0;
    if (iequals(unit, "s"))
      scale = 1000.0;
    else if (!unit.empty() && !iequals(unit, "ms"))
      throw SyntaxError(w.pos, {"time unit s or ms"}, w.text);
    double value = std::stod(number) * scale;
    if (value != std::floor(value))
      throw SyntaxError(w.pos, {"whole number of milliseconds"}, w.text);
    return static_cast<TimeMs>(value);
  }

  Scope parse_scope() {
    const Word &w = peek();
    if (is_keyword(w, "globally")) {
      ++at_;
      return Scope::globally();
    }
    if (is_keyword(w, "before")) {
      ++at_;
      return Scope::before(ident("scope end event"));
    }
    if (is_keyword(w, "after")) {
      ++at_;
      return Scope::after(ident("scope start event"));
    }
    if (is_keyword(w, "between")) {
      ++at_;
      std::string q = ident("scope start event");
      keyword("and");
      return Scope::between(std::move(q), ident("scope end event"));
    }
    fail({"'Globally'", "'Before'", "'After'", "'Between'"});
  }

  PatternInstance parse_body(Scope scope) {
    if (is_keyword(peek(), "it") && is_keyword(peek(1), "is")) {
      if (is_keyword(peek(2), "never")) {
        keywords({"it", "is", "never", "the", "case", "that"});
        std::string subject = ident("event name");
        keyword("holds");
        return PatternInstance::absence(std::move(scope), std::move(subject));
      }
      if (is_keyword(peek(2), "always")) {
        keywords({"it", "is", "always", "the", "case", "that"});
        std::string subject = ident("event name");
        keywords({"holds", "at", "least", "every"});
        TimeMs period = duration();
        return PatternInstance::recurrence(std::move(scope), std::move(subject), period);
      }
      unknown_pattern();
    }
    if (is_keyword(peek(), "if")) {
      ++at_;
      std::string trigger = ident("trigger event");
      keywords({"then", "in", "response"});
      std::vector<TimedResponse> responses;
      std::string first = ident("response event");
      keywords({"eventually", "within"});
      responses.push_back({std::move(first), duration()});
      while (is_keyword(peek(), "followed")) {
        keywords({"followed", "by"});
        std::string next = ident("response event");
        keyword("within");
        responses.push_back({std::move(next), duration()});
      }
      return PatternInstance::response(std::move(scope), std::move(trigger),
                                       std::move(responses));
    }
    if (peek().kind == Word::Ident)
      unknown_pattern();
    fail({"'it is never'", "'it is always'", "'if'"});
  }

  [[noreturn]] void unknown_pattern() const {
    throw Error(ErrorCode::UnknownPattern,
                "no supported pattern matches clause at position " +
                    std::to_string(peek().pos) + ": '" +
                    std::string(text_.substr(peek().pos)) + "'");
  }

  std::string_view text_;
  std::vector<Word> words_;
  std::size_t at_ = 0;
};

std::string duration_text(TimeMs ms) { return std::to_string(ms) + "ms"; }

// ---------------------------------------------------------------------------
// Observer templates

Transition on(StateId from, StateId to, std::string label, bool reset = false) {
  return {std::move(from), std::move(to), std::move(label), std::nullopt, reset};
}

Transition on_within(StateId from, StateId to, std::string label, TimeMs bound,
                     bool reset = false) {
  return {std::move(from), std::move(to), std::move(label),
          Guard{GuardOp::AtMost, bound}, reset};
}

Transition timeout(StateId from, StateId to, TimeMs bound) {
  return {std::move(from), std::move(to), std::nullopt,
          Guard{GuardOp::Exceeds, bound}, false};
}

Observer absence_observer(const PatternInstance &p) {
  const std::string &a = *p.subject;
  const Scope &s = p.scope;
  switch (s.kind) {
  case ScopeKind::Globally:
    return Observer({"ok", "error"}, "ok", "error", {on("ok", "error", a)});
  case ScopeKind::Before:
    return Observer({"open", "closed", "error"}, "open", "error",
                    {on("open", "error", a), on("open", "closed", s.close)});
  case ScopeKind::After:
    return Observer({"closed", "open", "error"}, "closed", "error",
                    {on("closed", "open", s.open), on("open", "error", a)});
  case ScopeKind::Between:
    return Observer({"closed", "open", "error"}, "closed", "error",
                    {on("closed", "open", s.open), on("open", "closed", s.close),
                     on("open", "error", a)});
  }
  throw Error(ErrorCode::UnsupportedCombination, "absence scope");
}

Observer recurrence_observer(const PatternInstance &p) {
  const std::string &a = *p.subject;
  TimeMs t = *p.recurrence_period_ms;
  if (p.scope.kind == ScopeKind::Globally)
    return Observer({"ok", "error"}, "ok", "error",
                    {on_within("ok", "ok", a, t, true), timeout("ok", "error", t)});
  const Scope &s = p.scope;
  return Observer({"closed", "open", "error"}, "closed", "error",
                  {on("closed", "open", s.open, true),
                   on_within("open", "open", a, t, true),
                   on_within("open", "closed", s.close, t),
                   timeout("open", "error", t)});
}

std::string waiting_name(const PatternInstance &p, std::size_t i) {
  return p.responses.size() == 1 ? std::string("waiting")
                                 : "waiting_" + std::to_string(i + 1);
}

Observer response_observer(const PatternInstance &p) {
  const Scope &s = p.scope;
  const bool between = s.kind == ScopeKind::Between;
  const std::size_t n = p.responses.size();

  std::vector<StateId> states;
  if (between)
    states.push_back("closed");
  states.push_back("open");
  for (std::size_t i = 0; i < n; ++i)
    states.push_back(waiting_name(p, i));
  states.push_back("error");

  std::vector<Transition> ts;
  if (between) {
    ts.push_back(on("closed", "open", s.open));
    ts.push_back(on("open", "closed", s.close));
  }
  ts.push_back(on("open", waiting_name(p, 0), *p.trigger, true));
  for (std::size_t i = 0; i < n; ++i) {
    const auto &r = p.responses[i];
    StateId w = waiting_name(p, i);
    if (i + 1 < n)
      ts.push_back(on_within(w, waiting_name(p, i + 1), r.event, r.deadline_ms, true));
    else
      ts.push_back(on_within(w, "open", r.event, r.deadline_ms));
    if (between)
      ts.push_back(on(w, "error", s.close));
    ts.push_back(timeout(w, "error", r.deadline_ms));
  }
  return Observer(std::move(states), between ? "closed" : "open", "error",
                  std::move(ts));
}

} // namespace

PatternInstance parse_requirement(std::string_view text) {
  return RequirementParser(text).parse();
}

std::string render_requirement(const PatternInstance &p) {
  std::string out;
  switch (p.scope.kind) {
  case ScopeKind::Globally: out = "Globally"; break;
  case ScopeKind::Before: out = "Before " + p.scope.close; break;
  case ScopeKind::After: out = "After " + p.scope.open; break;
  case ScopeKind::Between:
    out = "Between " + p.scope.open + " and " + p.scope.close;
    break;
  }
  out += ", ";
  switch (p.pattern) {
  case PatternKind::Absence:
    out += "it is never the case that " + p.subject.value_or("") + " holds";
    break;
  case PatternKind::Recurrence:
    out += "it is always the case that " + p.subject.value_or("") +
           " holds at least every " + duration_text(p.recurrence_period_ms.value_or(0));
    break;
  case PatternKind::Response:
  case PatternKind::ResponseChain:
    out += "if " + p.trigger.value_or("") + " then in response ";
    for (std::size_t i = 0; i < p.responses.size(); ++i) {
      const auto &r = p.responses[i];
      out += i == 0 ? r.event + " eventually within "
                    : " followed by " + r.event + " within ";
      out += duration_text(r.deadline_ms);
    }
    break;
  }
  return out;
}

void require_supported(const PatternInstance &p) {
  require_valid(p);
  if (!is_supported(p.pattern, p.scope.kind))
    throw Error(ErrorCode::UnsupportedCombination,
                std::string(to_string(p.pattern)) + " with scope " +
                    std::string(to_string(p.scope.kind)) + " is not supported");
}

MtlFormula to_mtl(const PatternInstance &p) {
  require_supported(p);
  using F = MtlFormula;
  const Scope &s = p.scope;
  auto scope_antecedent = [&] {
    return F::conjunction({F::atom(s.open), F::eventually(F::atom(s.close))});
  };
  auto within = [](TimeMs t) { return Bound{0, t}; };

  switch (p.pattern) {
  case PatternKind::Absence: {
    auto never = F::negation(F::atom(*p.subject));
    switch (s.kind) {
    case ScopeKind::Globally:
      return F::globally(never);
    case ScopeKind::Before:
      return F::implies(F::eventually(F::atom(s.close)),
                        F::until(never, F::atom(s.close)));
    case ScopeKind::After:
      return F::globally(F::implies(F::atom(s.open), F::globally(never)));
    case ScopeKind::Between:
      return F::globally(
          F::implies(scope_antecedent(), F::until(never, F::atom(s.close))));
    }
    break;
  }
  case PatternKind::Recurrence: {
    TimeMs t = *p.recurrence_period_ms;
    if (s.kind == ScopeKind::Globally)
      return F::globally(F::eventually(F::atom(*p.subject), within(t)));
    auto recur = F::eventually(
        F::disjunction({F::atom(*p.subject), F::atom(s.close)}), within(t));
    return F::globally(
        F::implies(scope_antecedent(), F::until(recur, F::atom(s.close))));
  }
  case PatternKind::Response:
  case PatternKind::ResponseChain: {
    const auto &rs = p.responses;
    if (s.kind == ScopeKind::Globally)
      return F::globally(F::implies(
          F::atom(*p.trigger),
          F::eventually(F::atom(rs[0].event), within(rs[0].deadline_ms))));
    std::vector<F> chain{F::atom(rs[0].event)};
    for (std::size_t i = 1; i < rs.size(); ++i) {
      chain.push_back(F::negation(F::atom(s.close)));
      chain.push_back(F::eventually(F::atom(rs[i].event), within(rs[i].deadline_ms)));
    }
    auto response = F::until(F::negation(F::atom(s.close)),
                             F::conjunction(std::move(chain)),
                             within(rs[0].deadline_ms));
    return F::globally(F::implies(
        scope_antecedent(),
        F::until(F::implies(F::atom(*p.trigger), std::move(response)),
                 F::atom(s.close))));
  }
  }
  throw Error(ErrorCode::UnsupportedCombination, "no template");
}

Observer instantiate_observer(const PatternInstance &p) {
  require_supported(p);
  Observer obs = [&] {
    switch (p.pattern) {
    case PatternKind::Absence: return absence_observer(p);
    case PatternKind::Recurrence: return recurrence_observer(p);
    case PatternKind::Response:
    case PatternKind::ResponseChain: return response_observer(p);
    }
    throw Error(ErrorCode::UnsupportedCombination, "no template");
  }();
  if (auto issues = validate(obs); !issues.empty())
    throw Error(ErrorCode::TemplateValidationError,
                std::string(to_string(issues.front().kind)) + " in state " +
                    issues.front().state + ": " + issues.front().detail);
  return obs;
}

std::set<std::string> relevant_event_types(const PatternInstance &p) {
  auto names = event_names(p);
  return {names.begin(), names.end()};
}

} // namespace adaptrv
