#include <catch_amalgamated.hpp>

#include "adaptrv/bench.hpp"
#include "adaptrv/error.hpp"
#include "adaptrv/oracle.hpp"
#include "adaptrv/trace_tools.hpp"
#include "support.hpp"

#include <filesystem>
#include <sstream>

using namespace adaptrv;

TEST_CASE("labels") {
  CHECK(parse_label("sat") == TraceLabel::Satisfying);
  CHECK(parse_label("violating") == TraceLabel::Violating);
  CHECK_THROWS_AS(parse_label("maybe"), Error);
}

TEST_CASE("violating response between trace") {
  auto p = PatternInstance::response(Scope::between("q", "r"), "p", {{"s", 1000}});
  auto t = generate(p, TraceLabel::Violating, 1, 60);
  CHECK(t.size() >= 40);
  CHECK(t.size() <= 90);
  CHECK(evaluate(p, t).kind == OracleVerdict::Violated);
}

TEST_CASE("satisfying absence has no subject event") {
  auto p = PatternInstance::absence(Scope::globally(), "alarm");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = generate(p, TraceLabel::Satisfying, seed);
    CHECK(std::none_of(t.begin(), t.end(), [](const Event &e) { return e.type == "alarm"; }));
  }
}

TEST_CASE("generated traces match their labels and are deterministic") {
  for (const auto &np : reference_patterns()) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      for (auto label : {TraceLabel::Satisfying, TraceLabel::Violating}) {
        auto t = generate(np.pattern, label, seed);
        INFO(np.name << " seed " << seed);
        CHECK(std::is_sorted(t.begin(), t.end(), [](const Event &a, const Event &b) {
          return a.timestamp < b.timestamp;
        }));
        auto v = evaluate(np.pattern, t);
        if (label == TraceLabel::Satisfying)
          CHECK(v.kind == OracleVerdict::SatisfiedSoFar);
        else
          CHECK(v.kind == OracleVerdict::Violated);
        CHECK(generate(np.pattern, label, seed) == t);
      }
    }
  }
}

TEST_CASE("violation causes vary with the seed") {
  auto p = PatternInstance::response(Scope::between("q", "r"), "p", {{"s", 1000}});
  std::set<std::string> endings;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto t = generate(p, TraceLabel::Violating, seed);
    auto at = *evaluate(p, t).at;
    auto hit = std::find_if(t.begin(), t.end(), [&](const Event &e) { return e.timestamp == at; });
    endings.insert(hit == t.end() ? std::string("timeout") : hit->type);
  }
  CHECK(endings.size() >= 2);
}

TEST_CASE("trace text format") {
  std::istringstream in("# comment\n100 request\n\n250   pulse_reply\n");
  auto t = parse_trace(in);
  CHECK(t == Trace{{"request", 100}, {"pulse_reply", 250}});
  std::ostringstream out;
  format_trace(out, t);
  CHECK(out.str() == "100 request\n250 pulse_reply\n");
}

TEST_CASE("malformed trace lines") {
  auto line_of = [](const std::string &text) {
    std::istringstream in(text);
    try {
      parse_trace(in);
    } catch (const ParseError &e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("5 a\n3 b\n") == 2);
  CHECK(line_of("x a\n") == 1);
  CHECK(line_of("1 a\n2\n") == 2);
  CHECK(line_of("1 a b\n") == 1);
}

TEST_CASE("trace file round trip") {
  auto path = std::filesystem::temp_directory_path() / "adaptrv_trace_test.txt";
  auto t = generate(bsn_requirement(), TraceLabel::Satisfying, 3);
  write_trace(t, path);
  CHECK(read_trace(path) == t);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_trace(path), Error);
}
