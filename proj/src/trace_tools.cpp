#include "adaptrv/trace_tools.hpp"

#include "adaptrv/error.hpp"
#include "adaptrv/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace adaptrv {

std::string_view to_string(TraceLabel label) {
  return label == TraceLabel::Satisfying ? "satisfying" : "violating";
}

TraceLabel parse_label(std::string_view text) {
  if (text == "sat" || text == "satisfying")
    return TraceLabel::Satisfying;
  if (text == "viol" || text == "violating")
    return TraceLabel::Violating;
  throw Error(ErrorCode::BadCommand, "unknown trace label '" + std::string(text) + "'");
}

namespace {

enum class Cause { Missing, Late, ScopeEnd };

class Builder {
public:
  Builder(const PatternInstance &p, std::uint64_t seed, std::size_t target)
      : p_(p), rng_(seed), target_(target) {
    auto used = event_names(p);
    for (std::size_t i = 0; noise_.size() < 5; ++i) {
      std::string name = "e" + std::to_string(i);
      if (std::find(used.begin(), used.end(), name) == used.end())
        noise_.push_back(name);
    }
    TimeMs bound = p.recurrence_period_ms.value_or(0);
    for (const auto &r : p.responses)
      bound = std::max(bound, r.deadline_ms);
    if (p.pattern == PatternKind::Absence)
      bound = 1000;
    std::size_t n = std::max<std::size_t>(1, p.responses.size());
    max_gap_ = std::max<TimeMs>(1, 2 * bound / static_cast<TimeMs>(n));
  }

  Trace build(bool violating) {
    will_violate_ = violating;
    // The violation lands somewhere in the first two thirds of the trace.
    std::size_t violate_after = violating ? pick(0, target_ * 2 / 3) : target_ + 1;
    bool violated = false;
    while (trace_.size() < target_ || (violating && !violated)) {
      if (!violated && violating && trace_.size() >= violate_after) {
        episode(true);
        violated = true;
      } else {
        episode(false);
      }
    }
    return std::move(trace_);
  }

  Cause cause = Cause::Missing;

private:
  std::uint64_t next() { return rng_(); }

  TimeMs pick(TimeMs lo, TimeMs hi) {
    if (hi <= lo)
      return lo;
    return lo + static_cast<TimeMs>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  std::size_t pick(std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(pick(static_cast<TimeMs>(lo), static_cast<TimeMs>(hi)));
  }

  bool chance(unsigned percent) { return next() % 100 < percent; }

  TimeMs gap() { return pick(TimeMs{1}, max_gap_); }

  void emit(const std::string &type, TimeMs at) {
    now_ = std::max(now_, at);
    trace_.push_back({type, now_});
  }

  void noise() { emit(noise_[next() % noise_.size()], now_ + gap()); }

  void noise_until(TimeMs limit, std::size_t max_count) {
    std::size_t count = pick(std::size_t{0}, max_count);
    std::vector<TimeMs> at;
    for (std::size_t i = 0; i < count; ++i)
      at.push_back(pick(now_, limit));
    std::sort(at.begin(), at.end());
    for (TimeMs t : at)
      emit(noise_[next() % noise_.size()], t);
  }

  void idle(std::size_t max_count) {
    std::size_t count = pick(std::size_t{0}, max_count);
    for (std::size_t i = 0; i < count; ++i)
      noise();
  }

  void episode(bool violating) {
    switch (p_.pattern) {
    case PatternKind::Absence: absence(violating); break;
    case PatternKind::Recurrence: recurrence(violating); break;
    case PatternKind::Response:
    case PatternKind::ResponseChain: response(violating); break;
    }
  }

  void absence(bool violating) {
    const std::string &a = *p_.subject;
    const Scope &s = p_.scope;
    switch (s.kind) {
    case ScopeKind::Globally:
      idle(3);
      if (violating)
        emit(a, now_ + gap());
      noise();
      break;
    case ScopeKind::Before:
      if (!closed_once_) {
        idle(3);
        if (violating) {
          emit(a, now_ + gap());
        } else if (!will_violate_ && chance(20)) {
          emit(s.close, now_ + gap());
          closed_once_ = true;
        }
      } else {
        idle(2);
        emit(chance(50) ? a : s.close, now_ + gap());
      }
      noise();
      break;
    case ScopeKind::After:
      if (!closed_once_) {
        idle(2);
        if (chance(50))
          emit(a, now_ + gap());
        if (violating || chance(20)) {
          emit(s.open, now_ + gap());
          closed_once_ = true;
        }
      }
      idle(3);
      if (violating)
        emit(a, now_ + gap());
      noise();
      break;
    case ScopeKind::Between:
      idle(2);
      if (chance(50))
        emit(a, now_ + gap());
      emit(s.open, now_ + gap());
      idle(3);
      if (violating)
        emit(a, now_ + gap());
      if (!violating || chance(50))
        emit(s.close, now_ + gap());
      break;
    }
  }

  // Keeps the recurrence alive inside an open window anchored at `anchor_`.
  void recur_steps(std::size_t steps) {
    const TimeMs t = *p_.recurrence_period_ms;
    for (std::size_t i = 0; i < steps; ++i) {
      TimeMs at = now_ + gap();
      if (at > anchor_ + t || chance(30)) {
        at = pick(now_, anchor_ + t);
        emit(*p_.subject, at);
        anchor_ = now_;
      } else {
        emit(noise_[next() % noise_.size()], at);
      }
    }
  }

  void recurrence(bool violating) {
    const TimeMs t = *p_.recurrence_period_ms;
    const bool between = p_.scope.kind == ScopeKind::Between;
    if (between) {
      idle(2);
      if (chance(30))
        emit(*p_.subject, now_ + gap());
      emit(p_.scope.open, now_ + gap());
      anchor_ = now_;
    }
    recur_steps(pick(std::size_t{1}, std::size_t{4}));
    if (violating) {
      if (between && cause == Cause::ScopeEnd) {
        emit(p_.scope.close, anchor_ + t + pick(TimeMs{1}, max_gap_));
        return;
      }
      if (cause == Cause::Late)
        emit(*p_.subject, anchor_ + t + pick(TimeMs{1}, max_gap_));
      else
        emit(noise_[next() % noise_.size()], anchor_ + t + pick(TimeMs{1}, max_gap_));
      anchor_ = now_;
      return;
    }
    if (between)
      emit(p_.scope.close, pick(now_, anchor_ + t));
  }

  void response(bool violating) {
    const bool between = p_.scope.kind == ScopeKind::Between;
    const auto &rs = p_.responses;
    if (between && !open_) {
      idle(2);
      if (chance(30))
        emit(chance(50) ? *p_.trigger : rs[next() % rs.size()].event, now_ + gap());
      if (chance(20))
        emit(p_.scope.close, now_ + gap());
      emit(p_.scope.open, now_ + gap());
      open_ = true;
    }
    idle(2);
    if (chance(25))
      emit(rs[next() % rs.size()].event, now_ + gap());
    emit(*p_.trigger, now_ + gap());
    std::size_t fail_at = violating ? pick(std::size_t{0}, rs.size() - 1) : rs.size();
    for (std::size_t j = 0; j < rs.size(); ++j) {
      TimeMs anchor = now_;
      TimeMs deadline = anchor + rs[j].deadline_ms;
      if (j == fail_at) {
        Cause c = cause == Cause::ScopeEnd && !between ? Cause::Missing : cause;
        if (c == Cause::ScopeEnd) {
          noise_until(deadline, 2);
          emit(p_.scope.close, pick(now_, deadline));
          open_ = false;
        } else if (c == Cause::Late) {
          noise_until(deadline, 2);
          emit(rs[j].event, deadline + pick(TimeMs{1}, max_gap_));
        } else {
          noise_until(deadline, 2);
          emit(noise_[next() % noise_.size()], deadline + pick(TimeMs{1}, max_gap_));
        }
        return;
      }
      TimeMs reply = pick(anchor, deadline);
      noise_until(reply, 2);
      emit(rs[j].event, reply);
    }
    if (between && chance(60)) {
      idle(1);
      emit(p_.scope.close, now_ + gap());
      open_ = false;
    }
  }

  const PatternInstance &p_;
  std::mt19937_64 rng_;
  std::size_t target_;
  std::vector<std::string> noise_;
  TimeMs max_gap_ = 1;
  TimeMs now_ = 0;
  TimeMs anchor_ = 0;
  bool open_ = false;
  bool closed_once_ = false;
  bool will_violate_ = false;
  Trace trace_;
};

bool matches(const OracleVerdict &v, TraceLabel label) {
  return label == TraceLabel::Satisfying ? v.kind == OracleVerdict::SatisfiedSoFar
                                         : v.kind == OracleVerdict::Violated;
}

} // namespace

Trace generate(const PatternInstance &p, TraceLabel label, std::uint64_t seed,
               std::size_t approx_length) {
  require_valid(p);
  if (!is_supported(p.pattern, p.scope.kind))
    throw Error(ErrorCode::UnsupportedCombination, "no generator for this pattern");
  constexpr int kAttempts = 64;
  const Cause causes[] = {Cause::Missing, Cause::Late, Cause::ScopeEnd};
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::uint64_t mixed = seed ^ (static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
    Builder b(p, mixed, std::max<std::size_t>(approx_length, 4));
    b.cause = causes[seed % 3];
    Trace t = b.build(label == TraceLabel::Violating);
    if (matches(evaluate(p, t), label))
      return t;
  }
  throw Error(ErrorCode::GenerationFailure,
              "no " + std::string(to_string(label)) + " trace found for seed " +
                  std::to_string(seed));
}

Trace parse_trace(std::istream &in) {
  Trace out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    std::istringstream words(line);
    std::string ts, type, extra;
    words >> ts >> type;
    if (type.empty() || (words >> extra))
      throw ParseError(lineno, "expected '<timestamp_ms> <event_type>'");
    TimeMs value = 0;
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), value);
    if (ec != std::errc() || ptr != ts.data() + ts.size() || value < 0)
      throw ParseError(lineno, "bad timestamp '" + ts + "'");
    if (!out.empty() && value < out.back().timestamp)
      throw ParseError(lineno, "timestamp " + ts + " precedes " +
                                   std::to_string(out.back().timestamp));
    out.push_back({type, value});
  }
  return out;
}

void format_trace(std::ostream &out, const Trace &trace) {
  for (const auto &ev : trace)
    out << ev.timestamp << ' ' << ev.type << '\n';
}

Trace read_trace(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return parse_trace(in);
}

void write_trace(const Trace &trace, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  format_trace(out, trace);
}

} // namespace adaptrv
