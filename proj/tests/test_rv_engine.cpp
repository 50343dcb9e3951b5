#include <catch_amalgamated.hpp>

#include "adaptrv/error.hpp"
#include "adaptrv/oracle.hpp"
#include "adaptrv/rv_engine.hpp"
#include "adaptrv/trace_tools.hpp"
#include "support.hpp"

using namespace adaptrv;

namespace {

MonitorSession bsn_session() { return MonitorSession("s", testing_support::bsn(), 0); }

struct Outcome {
  Verdict verdict;
  std::optional<TimeMs> at;
  bool operator==(const Outcome &) const = default;
};

// Submits the trace piecewise, processing a random number of queue items after
// each submission.
Outcome run_online(const PatternInstance &p, const Trace &trace, std::mt19937_64 &rng) {
  MonitorSession s("online", p, 0);
  for (const auto &ev : trace) {
    s.submit_event(ev);
    for (auto n = rng() % 3; n > 0; --n)
      s.process_next();
  }
  if (!trace.empty())
    s.submit_tick(horizon(trace));
  s.drain();
  return {s.verdict(), s.violation_time()};
}

} // namespace

TEST_CASE("relevant events are enqueued and the rest dropped") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  CHECK(s.queued() == 1);
  s.submit_event({"battery_low", 5});
  CHECK(s.queued() == 1);
  s.submit_event({"request", 7});
  s.submit_event({"cycle_ending", 7});
  CHECK(s.queued() == 3);
  CHECK(s.process_next() == StepKind::Stepped);
  CHECK(s.current_states() == std::vector<StateId>{"open"});
  s.process_next();
  CHECK(s.current_states() == std::vector<StateId>{"waiting_1"});
  s.process_next();
  CHECK(s.verdict() == Verdict::Violated);
}

TEST_CASE("submission order is enforced") {
  auto s = bsn_session();
  s.submit_event({"request", 10});
  try {
    s.submit_event({"request", 9});
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::TimeRegression);
  }
  CHECK_THROWS_AS(s.submit_tick(3), Error);
}

TEST_CASE("timer is armed on request and discarded on reply") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.process_next();
  CHECK(s.current_states() == std::vector<StateId>{"open"});
  CHECK_FALSE(s.pending_timer());
  s.process_next();
  CHECK(s.current_states() == std::vector<StateId>{"waiting_1"});
  CHECK(s.pending_timer() == 2101);

  s.submit_event({"thermometer_reply", 600});
  CHECK(s.process_next() == StepKind::Stepped);
  CHECK(s.current_states() == std::vector<StateId>{"waiting_2"});
  CHECK(s.pending_timer() == 2601);
  s.submit_event({"pulse_reply", 900});
  s.process_next();
  CHECK_FALSE(s.pending_timer());
  CHECK(s.verdict() == Verdict::Running);
}

TEST_CASE("timer expiry notifies the sink once") {
  auto s = bsn_session();
  std::vector<ViolationNotice> notices;
  s.set_sink([&](const ViolationNotice &n) { notices.push_back(n); });
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.submit_event({"thermometer_reply", 2500});
  s.process_next();
  s.process_next();
  CHECK(s.process_next() == StepKind::ViolationDetected);
  CHECK(s.violation_time() == 2101);
  REQUIRE(notices.size() == 1);
  CHECK(notices[0].session == "s");
  CHECK(notices[0].timestamp == 2101);
  CHECK(notices[0].property == render(to_mtl(testing_support::bsn())));
  s.drain();
  s.submit_event({"cycle_ending", 3000});
  s.submit_tick(9000);
  s.drain();
  CHECK(notices.size() == 1);
  CHECK(s.current_states() == std::vector<StateId>{"error"});
}

TEST_CASE("tick fires due timers") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.drain();
  s.submit_tick(2100);
  s.drain();
  CHECK(s.verdict() == Verdict::Running);
  s.submit_tick(2101);
  s.drain();
  CHECK(s.verdict() == Verdict::Violated);
  CHECK(s.violation_time() == 2101);
}

TEST_CASE("reply at the timer instant wins") {
  auto s = bsn_session();
  auto r = s.run_virtual({{"cycle_starting", 0}, {"request", 100}, {"thermometer_reply", 2100},
                          {"pulse_reply", 4100}});
  CHECK(r.verdict == Verdict::Running);
}

TEST_CASE("adaptation waits behind queued events") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.submit_event({"thermometer_reply", 600});
  s.request_adaptation(AdaptationRule::add_response("glucose_reply", 2000));
  CHECK(s.process_next() == StepKind::Stepped);
  CHECK(s.process_next() == StepKind::Stepped);
  CHECK(s.process_next() == StepKind::Stepped);
  CHECK(s.properties()[0].pattern->responses.size() == 2);
  CHECK(s.current_states() == std::vector<StateId>{"waiting_2"});
  CHECK(s.process_next() == StepKind::Adapted);
  CHECK(s.properties()[0].pattern->responses.size() == 3);
  CHECK(s.current_states() == std::vector<StateId>{"waiting_2"});
  CHECK(s.relevant().contains("glucose_reply"));
  CHECK(s.process_next() == StepKind::Idle);
}

TEST_CASE("adaptation on an empty queue applies on the next call") {
  auto s = bsn_session();
  s.request_adaptation(AdaptationRule::update_time_guard(3000));
  CHECK(s.properties()[0].pattern->responses[0].deadline_ms == 2000);
  CHECK(s.process_next() == StepKind::Adapted);
  CHECK(s.properties()[0].pattern->responses[0].deadline_ms == 3000);
}

TEST_CASE("two queued adaptations equal sequential offline application") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  auto r1 = AdaptationRule::add_response("glucose_reply", 2000);
  auto r2 = AdaptationRule::update_time_guard(3000);
  s.request_adaptation(r1);
  s.request_adaptation(r2);
  s.drain();

  auto p = testing_support::bsn();
  Observer o = instantiate_observer(p);
  o.reset_clock(0);
  o.step({"cycle_starting", 0});
  o.step({"request", 100});
  auto a = apply(o, p, r1);
  auto b = apply(a.properties[0].observer, a.properties[0].pattern, r2);
  CHECK(s.properties()[0].observer == b.properties[0].observer);
  CHECK(*s.properties()[0].pattern == b.properties[0].pattern);
}

TEST_CASE("shrinking a bound below the elapsed time violates on recheck") {
  auto p = testing_support::bsn();
  p.responses = {{"thermometer_reply", 3000}, {"pulse_reply", 3000}};
  MonitorSession s("s", p, 0);
  int notices = 0;
  s.set_sink([&](const ViolationNotice &) { ++notices; });
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.submit_tick(2600);
  s.drain();
  CHECK(s.verdict() == Verdict::Running);
  s.request_adaptation(AdaptationRule::update_time_guard(2000));
  CHECK(s.process_next() == StepKind::Adapted);
  CHECK(s.verdict() == Verdict::Violated);
  CHECK(s.violation_time() == 2600);
  CHECK(notices == 1);
}

TEST_CASE("failed adaptation leaves the session unchanged") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.drain();
  auto before = s.properties()[0].observer;
  s.request_adaptation(AdaptationRule::remove_response(7));
  try {
    s.process_next();
    FAIL("no error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::BadIndex);
  }
  CHECK(s.properties()[0].observer == before);
  CHECK(s.queued() == 0);
  s.submit_event({"battery_low", 5});
  CHECK(s.queued() == 0);
}

TEST_CASE("split sessions step every property") {
  auto s = bsn_session();
  s.submit_event({"cycle_starting", 0});
  s.submit_event({"request", 100});
  s.submit_event({"thermometer_reply", 200});
  s.request_adaptation(AdaptationRule::split_chain());
  s.drain();
  REQUIRE(s.properties().size() == 2);
  CHECK(s.current_states() == std::vector<StateId>{"open", "waiting"});
  CHECK(s.pending_timer() == 2201);
  s.request_adaptation(AdaptationRule::update_event("request", "s_request"));
  s.drain();
  CHECK(s.properties()[0].pattern->trigger == "s_request");
  CHECK(s.properties()[1].pattern->trigger == "s_request");
  s.request_adaptation(AdaptationRule::add_response("z", 10));
  CHECK_THROWS_AS(s.process_next(), Error);
  s.submit_tick(300);
  s.request_adaptation(AdaptationRule::update_time_guard(50), 2);
  s.drain();
  CHECK(s.properties()[1].pattern->responses[0].deadline_ms == 50);
  CHECK(s.verdict() == Verdict::Violated);
}

TEST_CASE("empty trace stays running") {
  auto s = bsn_session();
  CHECK(s.run_virtual({}).verdict == Verdict::Running);
}

TEST_CASE("generated traces agree with their labels") {
  auto p = PatternInstance::response(Scope::between("q", "r"), "p", {{"s", 1000}});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    MonitorSession sat("a", p, 0);
    CHECK(sat.run_virtual(generate(p, TraceLabel::Satisfying, seed)).verdict == Verdict::Running);
    auto trace = generate(p, TraceLabel::Violating, seed);
    MonitorSession viol("b", p, 0);
    auto r = viol.run_virtual(trace);
    CHECK(r.verdict == Verdict::Violated);
    CHECK(r.violation_at == evaluate(p, trace).at);
  }
}

TEST_CASE("offline and online runs agree") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    auto p = testing_support::random_instance(rng);
    auto trace = testing_support::random_trace(p, rng, 30);
    MonitorSession offline("off", p, 0);
    auto r = offline.run_virtual(trace);
    CHECK(run_online(p, trace, rng) == Outcome{r.verdict, r.violation_at});
  }
}

TEST_CASE("filtering does not change verdicts") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_instance(rng);
    auto trace = testing_support::random_trace(p, rng, 30);
    MonitorSession filtered("f", p, 0);
    auto r = filtered.run_virtual(trace);
    // Unfiltered reference: the observer alone, timers fired at every instant.
    Observer o = instantiate_observer(p);
    o.reset_clock(0);
    std::optional<TimeMs> at;
    for (const auto &ev : trace) {
      while (!at && o.next_timer() && *o.next_timer() < ev.timestamp) {
        TimeMs due = *o.next_timer();
        if (o.advance_time(due).entered_error)
          at = due;
      }
      if (!at && o.step(ev).entered_error)
        at = ev.timestamp;
    }
    if (!at && !trace.empty() && o.advance_time(horizon(trace)).entered_error)
      at = horizon(trace);
    CHECK(r.violation_at == at);
  }
}

TEST_CASE("exactly one notification per violated session") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_instance(rng);
    MonitorSession s("n", p, 0);
    int calls = 0;
    s.set_sink([&](const ViolationNotice &) { ++calls; });
    auto r = s.run_virtual(testing_support::random_trace(p, rng, 40));
    CHECK(calls == (r.verdict == Verdict::Violated ? 1 : 0));
  }
}

TEST_CASE("queued adaptation does not disturb the prefix") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_instance(rng);
    auto trace = testing_support::random_trace(p, rng, 25);
    std::size_t cut = rng() % (trace.size() + 1);
    Trace prefix(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(cut));

    auto record = [&](bool with_adaptation) {
      MonitorSession s("q", p, 0);
      std::vector<std::pair<std::vector<StateId>, Verdict>> seen;
      for (const auto &ev : prefix)
        s.submit_event(ev);
      if (with_adaptation)
        s.request_adaptation(AdaptationRule::update_event(event_names(p).back(), "renamed"));
      for (;;) {
        auto k = s.process_next();
        if (k == StepKind::Idle || k == StepKind::Adapted)
          break;
        seen.emplace_back(s.current_states(), s.verdict());
      }
      return seen;
    };
    CHECK(record(true) == record(false));
  }
}
