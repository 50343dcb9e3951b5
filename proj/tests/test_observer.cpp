#include <catch_amalgamated.hpp>

#include "adaptrv/error.hpp"
#include "adaptrv/observer.hpp"
#include "adaptrv/psp_catalog.hpp"
#include "support.hpp"

using namespace adaptrv;

namespace {

Observer bsn_observer() { return instantiate_observer(testing_support::bsn()); }

Observer in_waiting_1() {
  Observer o = bsn_observer();
  o.reset_clock(0);
  o.step({"cycle_starting", 0});
  o.step({"request", 100});
  return o;
}

bool has_issue(const std::vector<ValidationIssue> &issues, IssueKind kind) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue &i) { return i.kind == kind; });
}

} // namespace

TEST_CASE("step follows the bsn narrative") {
  Observer o = bsn_observer();
  auto r = o.step({"cycle_starting", 0});
  CHECK(r.taken);
  CHECK(r.new_state == "open");
  r = o.step({"request", 100});
  CHECK(r.taken);
  CHECK(r.new_state == "waiting_1");
  CHECK(o.clock_reset_at() == 100);
  r = o.step({"unrelated_event", 150});
  CHECK_FALSE(r.taken);
  CHECK(o.current() == "waiting_1");
  CHECK(o.clock_reset_at() == 100);
}

TEST_CASE("timeout boundary") {
  Observer o = in_waiting_1();
  auto r = o.advance_time(2100);
  CHECK_FALSE(r.taken);
  CHECK(o.current() == "waiting_1");
  r = o.advance_time(2101);
  CHECK(r.entered_error);
  CHECK(o.violated());
}

TEST_CASE("reply at the deadline is in time") {
  Observer o = in_waiting_1();
  CHECK(o.step({"thermometer_reply", 2100}).new_state == "waiting_2");
}

TEST_CASE("no timed transitions in open") {
  Observer o = bsn_observer();
  o.reset_clock(0);
  o.step({"cycle_starting", 0});
  CHECK_FALSE(o.advance_time(1'000'000).taken);
  CHECK(o.current() == "open");
  CHECK_FALSE(o.next_timer());
}

TEST_CASE("next timer") {
  CHECK(in_waiting_1().next_timer() == 2101);

  Observer two({"s", "t", "error"}, "s", "error",
               {{"s", "t", std::nullopt, Guard{GuardOp::Exceeds, 500}, false},
                {"s", "error", std::nullopt, Guard{GuardOp::Exceeds, 300}, false}});
  CHECK_FALSE(two.next_timer());
  two.reset_clock(0);
  CHECK(two.next_timer() == 301);
}

TEST_CASE("time regression") {
  Observer o = in_waiting_1();
  try {
    o.step({"thermometer_reply", 50});
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::TimeRegression);
  }
  CHECK_THROWS_AS(o.advance_time(99), Error);
  CHECK(o.current() == "waiting_1");
}

TEST_CASE("unset clock reads as zero") {
  Observer o({"a", "b", "error"}, "a", "error",
             {{"a", "b", "x", Guard{GuardOp::AtMost, 10}, false},
              {"a", "error", std::nullopt, Guard{GuardOp::Exceeds, 10}, false}});
  CHECK_FALSE(o.advance_time(500).taken);
  CHECK(o.step({"x", 900}).new_state == "b");
}

TEST_CASE("nondeterminism escape hatch") {
  Observer o({"a", "b", "error"}, "a", "error",
             {{"a", "b", "x", std::nullopt, false}, {"a", "error", "x", std::nullopt, false}});
  try {
    o.step({"x", 1});
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::NondeterminismDetected);
  }
}

TEST_CASE("validate examples") {
  CHECK(validate(bsn_observer()).empty());

  Observer two_unguarded({"a", "error"}, "a", "error",
                         {{"a", "error", std::nullopt, Guard{GuardOp::Exceeds, 5}, false},
                          {"a", "error", std::nullopt, Guard{GuardOp::Exceeds, 7}, false}});
  auto issues = validate(two_unguarded);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].kind == IssueKind::Nondeterminism);
  CHECK(issues[0].state == "a");

  Observer unguarded({"a", "error"}, "a", "error",
                     {{"a", "error", std::nullopt, std::nullopt, false},
                      {"a", "a", std::nullopt, std::nullopt, false}});
  auto u = validate(unguarded);
  CHECK(has_issue(u, IssueKind::UnguardedUnlabeled));
  CHECK(has_issue(u, IssueKind::Nondeterminism));

  Observer leaky({"a", "error"}, "a", "error",
                 {{"a", "error", "x", std::nullopt, false}, {"error", "a", "y", std::nullopt, false}});
  CHECK(has_issue(validate(leaky), IssueKind::ErrorNotAbsorbing));

  Observer overlap({"a", "b", "error"}, "a", "error",
                   {{"a", "b", "x", Guard{GuardOp::AtMost, 10}, false},
                    {"a", "error", "x", Guard{GuardOp::Exceeds, 9}, false}});
  CHECK(has_issue(validate(overlap), IssueKind::Nondeterminism));

  Observer disjoint({"a", "b", "error"}, "a", "error",
                    {{"a", "b", "x", Guard{GuardOp::AtMost, 10}, false},
                     {"a", "error", "x", Guard{GuardOp::Exceeds, 10}, false}});
  CHECK(validate(disjoint).empty());

  Observer negative({"a", "error"}, "a", "error",
                    {{"a", "error", std::nullopt, Guard{GuardOp::Exceeds, -1}, false}});
  CHECK(has_issue(validate(negative), IssueKind::NegativeBound));
}

TEST_CASE("local validation sees the touched states only") {
  Observer o({"a", "b", "error"}, "a", "error",
             {{"a", "b", "x", std::nullopt, false}, {"b", "a", "x", std::nullopt, false},
              {"b", "error", "x", std::nullopt, false}});
  CHECK(validate(o, {"a"}).empty());
  CHECK(has_issue(validate(o, {"b"}), IssueKind::Nondeterminism));
}

TEST_CASE("error is absorbing and unmatched steps are the identity") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_instance(rng);
    Observer o = instantiate_observer(p);
    o.reset_clock(0);
    bool seen_error = false;
    for (const auto &ev : testing_support::random_trace(p, rng, 40)) {
      const auto before = o.current();
      const auto reset = o.clock_reset_at();
      auto r = o.step(ev);
      if (!r.taken) {
        CHECK(o.current() == before);
        CHECK(o.clock_reset_at() == reset);
      }
      if (seen_error)
        CHECK(o.violated());
      seen_error = seen_error || o.violated();
      CHECK(o.violated() == (o.current() == o.error()));
    }
  }
}

TEST_CASE("isomorphism ignores names") {
  Observer a = bsn_observer();
  Observer b = a;
  b.rename_state("waiting_1", "w_first");
  CHECK(isomorphic(a, b));
  CHECK_FALSE(a == b);
  b.transition(0).reset = !b.transition(0).reset;
  CHECK_FALSE(isomorphic(a, b));
}

TEST_CASE("isomorphism with run state") {
  Observer a = in_waiting_1();
  Observer b = bsn_observer();
  CHECK(isomorphic(a, b));
  CHECK_FALSE(isomorphic(a, b, IsoMode::WithRunState));
  b.set_run_state("waiting_1", 100, 100);
  CHECK(isomorphic(a, b, IsoMode::WithRunState));
  b.set_run_state("waiting_2", 100, 100);
  CHECK_FALSE(isomorphic(a, b, IsoMode::WithRunState));
}
