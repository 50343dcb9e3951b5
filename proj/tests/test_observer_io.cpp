#include <catch_amalgamated.hpp>

#include "adaptrv/error.hpp"
#include "adaptrv/observer_io.hpp"
#include "adaptrv/psp_catalog.hpp"
#include "support.hpp"

#include <filesystem>

using namespace adaptrv;
using nlohmann::json;

TEST_CASE("observer json uses the documented field names") {
  Observer o = instantiate_observer(testing_support::bsn());
  json j = observer_to_json(o);
  for (auto key : {"states", "initial", "error", "transitions", "clock", "current",
                   "clock_reset_at", "violated"})
    CHECK(j.contains(key));
  CHECK(j["clock"] == "c");
  bool saw_guard = false;
  for (const auto &t : j["transitions"]) {
    CHECK(t.contains("source"));
    CHECK(t.contains("target"));
    CHECK(t["reset"].is_boolean());
    if (t.contains("guard")) {
      saw_guard = true;
      CHECK((t["guard"]["op"] == "<=" || t["guard"]["op"] == ">"));
      CHECK(t["guard"]["bound_ms"].is_number_integer());
    }
  }
  CHECK(saw_guard);
  CHECK_FALSE(observer_to_json(o, false).contains("current"));
}

TEST_CASE("snapshot round trip keeps the run state") {
  Observer o = instantiate_observer(testing_support::bsn());
  o.reset_clock(0);
  o.step({"cycle_starting", 0});
  o.step({"request", 100});
  Observer back = observer_from_json(json::parse(observer_to_json(o).dump()));
  CHECK(back == o);
  CHECK(back.current() == "waiting_1");
  CHECK(back.clock_reset_at() == 100);
  CHECK(back.last_time() == 100);
  CHECK(back.next_timer() == 2101);
}

TEST_CASE("document round trip through a file") {
  auto path = std::filesystem::temp_directory_path() / "adaptrv_doc_test.json";
  ObserverDocument doc{instantiate_observer(testing_support::bsn()), testing_support::bsn()};
  doc.observer.reset_clock(5);
  save_document(path, doc);
  ObserverDocument back = load_document(path);
  CHECK(back.observer == doc.observer);
  REQUIRE(back.pattern);
  CHECK(*back.pattern == *doc.pattern);
  std::filesystem::remove(path);
}

TEST_CASE("malformed documents") {
  auto code_of = [](auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::BadCommand;
  };
  CHECK(code_of([] { observer_from_json(json::object()); }) == ErrorCode::ParseError);
  CHECK(code_of([] {
          observer_from_json(json{{"states", {"a"}}, {"initial", "a"}, {"error", "zz"},
                                  {"transitions", json::array()}});
        }) == ErrorCode::TemplateValidationError);
  CHECK(code_of([] { load_document("/nonexistent/adaptrv.json"); }) == ErrorCode::IoError);
}
