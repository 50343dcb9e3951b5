#include <catch_amalgamated.hpp>

#include "adaptrv/error.hpp"
#include "adaptrv/pap_engine.hpp"
#include "adaptrv/psp_catalog.hpp"
#include "support.hpp"

#include <algorithm>

using namespace adaptrv;

namespace {

std::set<std::string> state_set(const Observer &o) {
  return {o.states().begin(), o.states().end()};
}

bool has_edge(const Observer &o, const std::string &from, const std::string &to,
              const std::optional<std::string> &label, std::optional<Guard> guard = {},
              bool reset = false) {
  return std::any_of(o.transitions().begin(), o.transitions().end(), [&](const Transition &t) {
    return t.source == from && t.target == to && t.label == label && t.guard == guard &&
           t.reset == reset;
  });
}

} // namespace

TEST_CASE("bsn requirement parses to a two-response chain") {
  auto p = parse_requirement(testing_support::bsn_text());
  CHECK(p.pattern == PatternKind::ResponseChain);
  CHECK(p.scope == Scope::between("cycle_starting", "cycle_ending"));
  CHECK(p.trigger == "request");
  CHECK(p.responses == std::vector<TimedResponse>{{"thermometer_reply", 2000}, {"pulse_reply", 2000}});
  CHECK_FALSE(p.subject);
  CHECK(p == testing_support::bsn());
}

TEST_CASE("minimal absence clause") {
  auto p = parse_requirement("Globally, it is never the case that alarm holds");
  CHECK(p == PatternInstance::absence(Scope::globally(), "alarm"));
}

TEST_CASE("keywords are case-insensitive and units normalize to milliseconds") {
  auto p = parse_requirement("BETWEEN Start AND Stop, IF Req THEN IN RESPONSE Ack EVENTUALLY "
                             "WITHIN 2s.");
  CHECK(p == PatternInstance::response(Scope::between("Start", "Stop"), "Req", {{"Ack", 2000}}));
  auto r = parse_requirement("After boot, it is always the case that beat holds at least every 150 ms");
  CHECK(r == PatternInstance::recurrence(Scope::after("boot"), "beat", 150));
}

TEST_CASE("other scopes parse") {
  CHECK(parse_requirement("Before end, it is never the case that x holds") ==
        PatternInstance::absence(Scope::before("end"), "x"));
  CHECK(parse_requirement("After go, it is never the case that x holds") ==
        PatternInstance::absence(Scope::after("go"), "x"));
  CHECK(parse_requirement("Globally, it is always the case that hb holds at least every 1s") ==
        PatternInstance::recurrence(Scope::globally(), "hb", 1000));
}

TEST_CASE("syntax errors carry position and expected tokens") {
  try {
    parse_requirement("Between a b, it is never the case that x holds");
    FAIL("no error");
  } catch (const SyntaxError &e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.position() == 10);
    CHECK(std::find(e.expected().begin(), e.expected().end(), "'and'") != e.expected().end());
  }
  CHECK_THROWS_AS(parse_requirement(""), SyntaxError);
  CHECK_THROWS_AS(parse_requirement("Globally, if p then in response s eventually within x"),
                  SyntaxError);
}

TEST_CASE("unknown clause forms and reused names") {
  try {
    parse_requirement("Globally, it is sometimes the case that x holds");
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::UnknownPattern);
  }
  try {
    parse_requirement("Between a and b, if a then in response c eventually within 10");
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::InvalidPattern);
  }
}

TEST_CASE("render and parse round trip for random instances") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    auto p = testing_support::random_instance(rng);
    auto text = render_requirement(p);
    INFO(text);
    CHECK(parse_requirement(text) == p);
  }
}

TEST_CASE("absence globally mtl") {
  CHECK(render(to_mtl(PatternInstance::absence(Scope::globally(), "a"))) == "□(¬a)");
}

TEST_CASE("unsupported combinations") {
  auto p = PatternInstance::recurrence(Scope::before("r"), "x", 10);
  auto check = [&](auto &&fn) {
    try {
      fn();
      FAIL("no error");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::UnsupportedCombination);
    }
  };
  check([&] { to_mtl(p); });
  check([&] { instantiate_observer(p); });
  check([&] { to_mtl(PatternInstance::response(Scope::globally(), "p", {{"a", 1}, {"b", 2}})); });
  check([&] { instantiate_observer(PatternInstance::response(Scope::after("q"), "p", {{"a", 1}})); });
}

TEST_CASE("bsn observer follows the canonical chain construction") {
  Observer o = instantiate_observer(testing_support::bsn());
  CHECK(state_set(o) == std::set<std::string>{"closed", "open", "waiting_1", "waiting_2", "error"});
  CHECK(o.initial() == "closed");
  CHECK(o.current() == "closed");
  CHECK(o.error() == "error");
  CHECK_FALSE(o.clock_reset_at());
  Guard le{GuardOp::AtMost, 2000}, gt{GuardOp::Exceeds, 2000};
  CHECK(has_edge(o, "closed", "open", "cycle_starting"));
  CHECK(has_edge(o, "open", "closed", "cycle_ending"));
  CHECK(has_edge(o, "open", "waiting_1", "request", std::nullopt, true));
  CHECK(has_edge(o, "waiting_1", "waiting_2", "thermometer_reply", le, true));
  CHECK(has_edge(o, "waiting_2", "open", "pulse_reply", le, false));
  for (auto w : {"waiting_1", "waiting_2"}) {
    CHECK(has_edge(o, w, "error", "cycle_ending"));
    CHECK(has_edge(o, w, "error", std::nullopt, gt));
  }
  CHECK(o.transitions().size() == 9);
  CHECK(validate(o).empty());
}

TEST_CASE("absence globally observer") {
  Observer o = instantiate_observer(PatternInstance::absence(Scope::globally(), "a"));
  CHECK(state_set(o) == std::set<std::string>{"ok", "error"});
  REQUIRE(o.transitions().size() == 1);
  CHECK(has_edge(o, "ok", "error", "a"));
}

TEST_CASE("chain of n responses has n + 3 states") {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<TimedResponse> rs;
    for (std::size_t i = 0; i < n; ++i)
      rs.push_back({"s" + std::to_string(i), 100});
    Observer o = instantiate_observer(PatternInstance::response(Scope::between("q", "r"), "p", rs));
    CHECK(o.states().size() == n + 3);
    CHECK(o.transitions().size() == 3 * n + 3);
  }
}

TEST_CASE("relevant event types") {
  CHECK(relevant_event_types(testing_support::bsn()) ==
        std::set<std::string>{"cycle_starting", "cycle_ending", "request", "thermometer_reply",
                              "pulse_reply"});
  CHECK(relevant_event_types(PatternInstance::absence(Scope::globally(), "a")) ==
        std::set<std::string>{"a"});
  auto p = testing_support::bsn();
  auto out = apply(instantiate_observer(p), p, AdaptationRule::update_event("request", "s_request"));
  auto rel = relevant_event_types(out.properties.front().pattern);
  CHECK(rel.contains("s_request"));
  CHECK_FALSE(rel.contains("request"));
}

TEST_CASE("catalog properties over random instances") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto p = testing_support::random_instance(rng);
    INFO(render_requirement(p));
    auto f = to_mtl(p);
    CHECK(relevant_event_types(p) == atoms(f));
    Observer o = instantiate_observer(p);
    CHECK(validate(o).empty());
    CHECK(o.current() == o.initial());
    CHECK_FALSE(o.clock_reset_at());
  }
}

TEST_CASE("to_mtl is injective up to renaming") {
  std::mt19937_64 rng(8);
  std::vector<PatternInstance> seen;
  for (int i = 0; i < 200; ++i)
    seen.push_back(testing_support::random_instance(rng));
  for (std::size_t a = 0; a < seen.size(); ++a)
    for (std::size_t b = a + 1; b < seen.size(); ++b)
      if (!(seen[a] == seen[b]))
        CHECK_FALSE(to_mtl(seen[a]) == to_mtl(seen[b]));
}
