#include "adaptrv/mtl.hpp"

#include "adaptrv/error.hpp"

#include <cctype>
#include <utility>

namespace adaptrv {

MtlFormula::MtlFormula(Op op, std::string name, std::vector<MtlFormula> children,
                       std::optional<Bound> bound)
    : op_(op), name_(std::move(name)), children_(std::move(children)),
      bound_(bound) {
  if (bound_ && (bound_->lo < 0 || bound_->lo > bound_->hi))
    throw Error(ErrorCode::UnsupportedFormula,
                "time bound must satisfy 0 <= lo <= hi");
}

MtlFormula MtlFormula::atom(std::string name) {
  return MtlFormula(Op::Atom, std::move(name), {}, {});
}

MtlFormula MtlFormula::negation(MtlFormula f) {
  return MtlFormula(Op::Not, {}, {std::move(f)}, {});
}

MtlFormula MtlFormula::conjunction(std::vector<MtlFormula> operands) {
  if (operands.size() == 1)
    return std::move(operands.front());
  return MtlFormula(Op::And, {}, std::move(operands), {});
}

MtlFormula MtlFormula::disjunction(std::vector<MtlFormula> operands) {
  if (operands.size() == 1)
    return std::move(operands.front());
  return MtlFormula(Op::Or, {}, std::move(operands), {});
}

MtlFormula MtlFormula::implies(MtlFormula lhs, MtlFormula rhs) {
  return MtlFormula(Op::Implies, {}, {std::move(lhs), std::move(rhs)}, {});
}

MtlFormula MtlFormula::globally(MtlFormula f) {
  return MtlFormula(Op::Globally, {}, {std::move(f)}, {});
}

MtlFormula MtlFormula::eventually(MtlFormula f, std::optional<Bound> bound) {
  return MtlFormula(Op::Eventually, {}, {std::move(f)}, bound);
}

MtlFormula MtlFormula::until(MtlFormula lhs, MtlFormula rhs,
                             std::optional<Bound> bound) {
  return MtlFormula(Op::Until, {}, {std::move(lhs), std::move(rhs)}, bound);
}

namespace {

struct Symbols {
  const char *globally, *eventually, *negation, *conj, *disj, *implies;
};

constexpr Symbols kUnicode{"□", "◊", "¬", " ∧ ", " ∨ ", " → "};
constexpr Symbols kAscii{"G", "F", "!", " & ", " | ", " -> "};

std::string seconds(TimeMs ms) {
  std::string out = std::to_string(ms / 1000);
  if (TimeMs frac = ms % 1000; frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 3 - digits.size(), '0');
    while (digits.back() == '0')
      digits.pop_back();
    out += "." + digits;
  }
  return out;
}

std::string bound_text(const Bound &b) {
  return "[" + seconds(b.lo) + "," + seconds(b.hi) + "]";
}

bool is_unbounded_eventually(const MtlFormula &f) {
  return f.op() == MtlFormula::Op::Eventually && !f.bound();
}

class Renderer {
public:
  explicit Renderer(MtlStyle style)
      : sym_(style == MtlStyle::Unicode ? kUnicode : kAscii),
        ascii_(style == MtlStyle::Ascii) {}

  std::string operator()(const MtlFormula &f) const {
    using Op = MtlFormula::Op;
    switch (f.op()) {
    case Op::Atom:
      return f.name();
    case Op::Not:
      return sym_.negation + wrap_unless_atom(f.child());
    case Op::Globally:
      return std::string(sym_.globally) + "(" + (*this)(f.child()) + ")";
    case Op::Eventually:
      if (f.bound())
        return sym_.eventually + bound_text(*f.bound()) + "(" +
               (*this)(f.child()) + ")";
      if (ascii_ && f.child().is_atom())
        return std::string(sym_.eventually) + " " + f.child().name();
      return sym_.eventually + wrap_unless_atom(f.child());
    case Op::And:
    case Op::Or: {
      std::string out;
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i > 0)
          out += f.op() == Op::And ? sym_.conj : sym_.disj;
        const auto &c = f.children()[i];
        bool bare = c.is_atom() || c.op() == Op::Not || is_unbounded_eventually(c);
        out += bare ? (*this)(c) : paren(c);
      }
      return out;
    }
    case Op::Implies: {
      const auto &l = f.child(0);
      const auto &r = f.child(1);
      bool bare_l = l.is_atom() || l.op() == Op::Not || is_unbounded_eventually(l);
      bool bare_r = r.is_atom() || r.op() == Op::Globally ||
                    (r.op() == Op::Until && !r.bound());
      return (bare_l ? (*this)(l) : paren(l)) + sym_.implies +
             (bare_r ? (*this)(r) : paren(r));
    }
    case Op::Until: {
      const auto &l = f.child(0);
      const auto &r = f.child(1);
      bool bare_l = l.is_atom() || l.op() == Op::Not;
      std::string op = " U";
      if (f.bound())
        op += bound_text(*f.bound());
      op += " ";
      bool bare_r = !f.bound() && r.is_atom();
      return (bare_l ? (*this)(l) : paren(l)) + op +
             (bare_r ? (*this)(r) : paren(r));
    }
    }
    return {};
  }

private:
  std::string paren(const MtlFormula &f) const { return "(" + (*this)(f) + ")"; }
  std::string wrap_unless_atom(const MtlFormula &f) const {
    return f.is_atom() ? f.name() : paren(f);
  }

  Symbols sym_;
  bool ascii_;
};

enum class Tok {
  End, Ident, Globally, Eventually, Not, And, Or, Implies, Until,
  LParen, RParen, LBracket, RBracket, Comma, Number,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

class MtlParser {
public:
  explicit MtlParser(std::string_view text) : text_(text) { advance(); }

  MtlFormula parse() {
    auto f = implication();
    if (tok_.kind != Tok::End)
      fail({"end of formula"});
    return f;
  }

private:
  MtlFormula implication() {
    auto lhs = until_expr();
    if (tok_.kind == Tok::Implies) {
      advance();
      return MtlFormula::implies(std::move(lhs), implication());
    }
    return lhs;
  }

  MtlFormula until_expr() {
    auto lhs = or_expr();
    if (tok_.kind == Tok::Until) {
      advance();
      std::optional<Bound> b;
      if (tok_.kind == Tok::LBracket)
        b = bound();
      return MtlFormula::until(std::move(lhs), until_expr(), b);
    }
    return lhs;
  }

  MtlFormula or_expr() {
    std::vector<MtlFormula> ops{and_expr()};
    while (tok_.kind == Tok::Or) {
      advance();
      ops.push_back(and_expr());
    }
    return MtlFormula::disjunction(std::move(ops));
  }

  MtlFormula and_expr() {
    std::vector<MtlFormula> ops{unary()};
    while (tok_.kind == Tok::And) {
      advance();
      ops.push_back(unary());
    }
    return MtlFormula::conjunction(std::move(ops));
  }

  MtlFormula unary() {
    switch (tok_.kind) {
    case Tok::Not:
      advance();
      return MtlFormula::negation(unary());
    case Tok::Globally:
      advance();
      return MtlFormula::globally(unary());
    case Tok::Eventually: {
      advance();
      std::optional<Bound> b;
      if (tok_.kind == Tok::LBracket)
        b = bound();
      return MtlFormula::eventually(unary(), b);
    }
    case Tok::LParen: {
      advance();
      auto f = implication();
      expect(Tok::RParen, ")");
      return f;
    }
    case Tok::Ident: {
      auto f = MtlFormula::atom(tok_.text);
      advance();
      return f;
    }
    default:
      fail({"event name", "(", "unary operator"});
    }
  }

  Bound bound() {
    expect(Tok::LBracket, "[");
    TimeMs lo = number();
    expect(Tok::Comma, ",");
    TimeMs hi = number();
    expect(Tok::RBracket, "]");
    if (lo > hi)
      throw Error(ErrorCode::UnsupportedFormula, "bound lower end exceeds upper end");
    return {lo, hi};
  }

  // Seconds with up to millisecond precision.
  TimeMs number() {
    if (tok_.kind != Tok::Number)
      fail({"number"});
    const std::string &s = tok_.text;
    auto dot = s.find('.');
    TimeMs whole = std::stoll(s.substr(0, dot));
    TimeMs frac = 0;
    if (dot != std::string::npos) {
      std::string digits = s.substr(dot + 1);
      while (digits.size() > 3 && digits.back() == '0')
        digits.pop_back();
      if (digits.size() > 3)
        fail({"bound with millisecond precision"});
      digits.append(3 - digits.size(), '0');
      frac = std::stoll(digits);
    }
    advance();
    return whole * 1000 + frac;
  }

  void expect(Tok kind, const char *what) {
    if (tok_.kind != kind)
      fail({what});
    advance();
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    throw SyntaxError(tok_.pos, std::move(expected), tok_.text);
  }

  bool match_symbol(std::string_view sym) {
    if (text_.substr(pos_, sym.size()) == sym) {
      pos_ += sym.size();
      return true;
    }
    return false;
  }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    tok_ = Token{Tok::End, {}, pos_};
    if (pos_ >= text_.size())
      return;
    std::size_t start = pos_;
    auto set = [&](Tok k) {
      tok_.kind = k;
      tok_.text = std::string(text_.substr(start, pos_ - start));
    };
    if (match_symbol("□")) return set(Tok::Globally);
    if (match_symbol("◊") || match_symbol("◇")) return set(Tok::Eventually);
    if (match_symbol("¬") || match_symbol("!")) return set(Tok::Not);
    if (match_symbol("∧") || match_symbol("&")) return set(Tok::And);
    if (match_symbol("∨") || match_symbol("|")) return set(Tok::Or);
    if (match_symbol("→") || match_symbol("->")) return set(Tok::Implies);
    if (match_symbol("(")) return set(Tok::LParen);
    if (match_symbol(")")) return set(Tok::RParen);
    if (match_symbol("[")) return set(Tok::LBracket);
    if (match_symbol("]")) return set(Tok::RBracket);
    if (match_symbol(",")) return set(Tok::Comma);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        ++pos_;
      return set(Tok::Number);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      set(Tok::Ident);
      if (tok_.text == "U") tok_.kind = Tok::Until;
      else if (tok_.text == "G") tok_.kind = Tok::Globally;
      else if (tok_.text == "F") tok_.kind = Tok::Eventually;
      return;
    }
    // Consume one UTF-8 code point for the error message.
    ++pos_;
    while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80)
      ++pos_;
    tok_.text = std::string(text_.substr(start, pos_ - start));
    throw SyntaxError(start, {"MTL token"}, tok_.text);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_;
};

void collect_atoms(const MtlFormula &f, std::set<std::string> &out) {
  if (f.is_atom())
    out.insert(f.name());
  for (const auto &c : f.children())
    collect_atoms(c, out);
}

} // namespace

std::string render(const MtlFormula &f, MtlStyle style) {
  return Renderer(style)(f);
}

MtlFormula parse_mtl(std::string_view text) { return MtlParser(text).parse(); }

MtlFormula normalize(const MtlFormula &f) {
  using Op = MtlFormula::Op;
  switch (f.op()) {
  case Op::Atom:
    return f;
  case Op::Not:
    return MtlFormula::negation(normalize(f.child()));
  case Op::Globally:
    return MtlFormula::globally(normalize(f.child()));
  case Op::Eventually:
    return MtlFormula::eventually(normalize(f.child()), f.bound());
  case Op::Implies:
    return MtlFormula::implies(normalize(f.child(0)), normalize(f.child(1)));
  case Op::Until:
    return MtlFormula::until(normalize(f.child(0)), normalize(f.child(1)), f.bound());
  case Op::And:
  case Op::Or: {
    std::vector<MtlFormula> flat;
    for (const auto &c : f.children()) {
      auto n = normalize(c);
      if (n.op() == f.op())
        flat.insert(flat.end(), n.children().begin(), n.children().end());
      else
        flat.push_back(std::move(n));
    }
    return f.op() == Op::And ? MtlFormula::conjunction(std::move(flat))
                             : MtlFormula::disjunction(std::move(flat));
  }
  }
  return f;
}

std::set<std::string> atoms(const MtlFormula &f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

} // namespace adaptrv
