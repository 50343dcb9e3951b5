#include <catch_amalgamated.hpp>

#include "adaptrv/control_service.hpp"
#include "adaptrv/error.hpp"
#include "adaptrv/observer_io.hpp"
#include "adaptrv/psp_catalog.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adaptrv;
using nlohmann::json;

namespace {

const std::string kBsnMtl = render(to_mtl(testing_support::bsn()));

json state_of(ControlService &svc, const std::string &id) {
  auto reply = svc.handle_line("STATE " + id);
  REQUIRE(reply.rfind("OK ", 0) == 0);
  return json::parse(reply.substr(3));
}

std::vector<json> kinds(ControlService &svc, const std::string &kind) {
  std::vector<json> out;
  for (auto &m : svc.hub().since(0))
    if (m["kind"] == kind)
      out.push_back(m);
  return out;
}

} // namespace

TEST_CASE("load replies with id and formula") {
  ControlService svc;
  CHECK(svc.handle_line(std::string("LOAD ") + testing_support::bsn_text()) == "OK 0 " + kBsnMtl);
  CHECK(svc.handle_line("LOAD Globally, it is never the case that alarm holds") == "OK 1 □(¬alarm)");
  CHECK(svc.handle_line("LIST") == R"(OK ["0","1"])");
}

TEST_CASE("event then state") {
  ControlService svc;
  svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
  CHECK(svc.handle_line("EVENT 0 cycle_starting") == "OK");
  CHECK(svc.handle_line("EVENT 100 request") == "OK");
  json s = state_of(svc, "0");
  CHECK(s["id"] == "0");
  CHECK(s["verdict"] == "Running");
  CHECK(s["violation_at"].is_null());
  CHECK(s["pending_timer"] == 2101);
  CHECK(s["now"] == 100);
  REQUIRE(s["properties"].size() == 1);
  const auto &p = s["properties"][0];
  CHECK(p["current"] == "waiting_1");
  CHECK(p["clock_reset_at"] == 100);
  CHECK(p["clock_valuation"] == 0);
  CHECK(p["violated"] == false);
  CHECK(p["mtl"] == kBsnMtl);
  CHECK(p["requirement"] == render_requirement(testing_support::bsn()));
  CHECK(p["observer"]["states"].size() == 5);
  CHECK(s["relevant_events"].size() == 5);
}

TEST_CASE("adapt replies after quiescent application") {
  ControlService svc;
  svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
  svc.handle_line("EVENT 0 cycle_starting");
  svc.handle_line("EVENT 100 request");
  svc.handle_line("EVENT 600 thermometer_reply");
  auto reply = svc.handle_line("ADAPT 0 ADD_RESPONSE glucose_reply 2000");
  REQUIRE(reply.rfind("OK ", 0) == 0);
  json r = json::parse(reply.substr(3));
  CHECK(r["id"] == "0");
  CHECK(r["rule"] == "ADD_RESPONSE glucose_reply 2000");
  CHECK(r["old_properties"] == json::array({kBsnMtl}));
  CHECK(r["new_properties"][0] == bsn_expected_formulas()[1][0]);
  CHECK(r["states"] == json::array({"waiting_2"}));

  auto adapted = kinds(svc, "adaptation");
  REQUIRE(adapted.size() == 1);
  CHECK(adapted[0]["old_properties"] == json::array({kBsnMtl}));
  CHECK(adapted[0]["new_properties"] == r["new_properties"]);
}

TEST_CASE("split sessions are addressed per property") {
  ControlService svc;
  svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
  svc.handle_line("EVENT 0 cycle_starting");
  svc.handle_line("EVENT 100 request");
  svc.handle_line("EVENT 200 thermometer_reply");
  auto r = json::parse(svc.handle_line("ADAPT 0 SPLIT").substr(3));
  CHECK(r["states"] == json::array({"open", "waiting"}));
  CHECK(svc.handle_line("ADAPT 0 ADD_RESPONSE x 10").rfind("ERR BadIndex", 0) == 0);
  auto one = json::parse(svc.handle_line("ADAPT 0.2 UPDATE_GUARD 5000").substr(3));
  CHECK(one["states"] == json::array({"open", "waiting"}));
  CHECK(state_of(svc, "0")["pending_timer"] == 5201);
}

TEST_CASE("violations are reported once") {
  ControlService svc;
  svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
  svc.handle_line("EVENT 0 cycle_starting");
  svc.handle_line("EVENT 100 request");
  CHECK(svc.handle_line("VERDICT 0") == "OK Running");
  CHECK(svc.handle_line("TICK 2101") == "OK");
  CHECK(svc.handle_line("VERDICT 0") == "OK Violated 2101");
  svc.handle_line("EVENT 3000 cycle_ending");
  svc.handle_line("TICK 9000");
  auto v = kinds(svc, "violation");
  REQUIRE(v.size() == 1);
  CHECK(v[0]["session"] == "0");
  CHECK(v[0]["timestamp"] == 2101);
  CHECK(v[0]["rendered_property"] == kBsnMtl);
  CHECK(v[0]["state"] == "error");
}

TEST_CASE("errors are reported as lines") {
  ControlService svc;
  CHECK(svc.handle_line("").empty());
  CHECK(svc.handle_line("# note").empty());
  CHECK(svc.handle_line("FROB").rfind("ERR BadCommand ", 0) == 0);
  CHECK(svc.handle_line("LOAD").rfind("ERR BadCommand ", 0) == 0);
  CHECK(svc.handle_line("LOAD Between a b, it is never the case that x holds").rfind("ERR SyntaxError ", 0) == 0);
  CHECK(svc.handle_line("LOAD Before r, it is always the case that x holds at least every 5")
            .rfind("ERR UnsupportedCombination ", 0) == 0);
  CHECK(svc.handle_line("LOAD Globally, it never").rfind("ERR UnknownPattern ", 0) == 0);
  CHECK(svc.handle_line("STATE 9").rfind("ERR UnknownSession ", 0) == 0);
  CHECK(svc.handle_line("EVENT x y").rfind("ERR BadCommand ", 0) == 0);
  svc.handle_line("LOAD Globally, it is never the case that a holds");
  CHECK(svc.handle_line("ADAPT 0 UPDATE_GUARD 5").rfind("ERR NoTimeBound ", 0) == 0);
  CHECK(svc.handle_line("ADAPT 0 SPLIT").rfind("ERR WrongPattern ", 0) == 0);
  svc.handle_line("EVENT 10 b");
  CHECK(svc.handle_line("EVENT 5 b").rfind("ERR TimeRegression ", 0) == 0);
  CHECK(svc.handle_line("DELETE 0") == "OK 0");
  CHECK(svc.handle_line("LIST") == "OK []");
  CHECK(svc.handle_line("QUIT") == "OK bye");
}

TEST_CASE("save and restore resume the same state") {
  auto path = std::filesystem::temp_directory_path() / "adaptrv_service_save.json";
  json before;
  {
    ControlService svc;
    svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
    svc.handle_line("EVENT 0 cycle_starting");
    svc.handle_line("EVENT 100 request");
    svc.handle_line("ADAPT 0 SPLIT");
    CHECK(svc.handle_line("SAVE " + path.string()) == "OK " + path.string());
    before = state_of(svc, "0");
  }
  ControlService svc;
  CHECK(svc.handle_line("RESTORE " + path.string()) == "OK 1");
  json after = state_of(svc, "0");
  CHECK(after == before);
  svc.handle_line("TICK 2101");
  CHECK(svc.handle_line("VERDICT 0") == "OK Violated 2101");
  CHECK(svc.handle_line("RESTORE /nonexistent/x.json").rfind("ERR IoError", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("observer documents load as sessions") {
  auto path = std::filesystem::temp_directory_path() / "adaptrv_service_obs.json";
  save_document(path, {instantiate_observer(testing_support::bsn()), std::nullopt});
  ControlService svc;
  auto reply = svc.handle_line("LOAD @" + path.string());
  CHECK(reply.rfind("OK 0 observer(5 states, 9 transitions)", 0) == 0);
  svc.handle_line("EVENT 0 cycle_starting");
  svc.handle_line("EVENT 10 request");
  CHECK(state_of(svc, "0")["properties"][0]["current"] == "waiting_1");
  CHECK(svc.handle_line("ADAPT 0 UPDATE_GUARD 5").rfind("ERR ", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("stdio loop with notifications") {
  ControlService svc;
  std::istringstream in(std::string("LOAD ") + testing_support::bsn_text() +
                        "\nEVENT 0 cycle_starting\nBOGUS\nQUIT\nLIST\n");
  std::ostringstream out;
  run_stdio(svc, in, out, true);
  std::vector<std::string> lines;
  std::istringstream read(out.str());
  for (std::string l; std::getline(read, l);)
    lines.push_back(l);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].rfind("OK 0 ", 0) == 0);
  CHECK(lines[1].rfind("NOTIFY ", 0) == 0);
  auto n = json::parse(lines[1].substr(7));
  CHECK(n["kind"] == "step");
  CHECK(n["state"] == "open");
  CHECK(n["seq"] == 1);
  CHECK(lines[2] == "OK");
  CHECK(lines[3].rfind("ERR BadCommand", 0) == 0);
  CHECK(lines[4] == "OK bye");
}

TEST_CASE("notification hub drops the oldest") {
  NotificationHub hub(3);
  for (int i = 0; i < 5; ++i)
    hub.publish({{"n", i}});
  auto all = hub.since(0);
  REQUIRE(all.size() == 3);
  CHECK(all.front()["n"] == 2);
  CHECK(all.front()["seq"] == 3);
  CHECK(hub.dropped() == 2);
  CHECK(hub.since(4).size() == 1);
  CHECK(hub.since(5, std::chrono::milliseconds(5)).empty());
}

TEST_CASE("config file and time mode") {
  auto path = std::filesystem::temp_directory_path() / "adaptrv_config.json";
  {
    std::ofstream out(path);
    out << R"({"listen": "0.0.0.0:9000", "time_mode": "wall", "log_level": "debug", "extra": 1})";
  }
  auto cfg = ServiceConfig::from_file(path);
  CHECK(cfg.listen == "0.0.0.0:9000");
  CHECK(cfg.time_mode == TimeMode::Wall);
  CHECK(cfg.log_level == "debug");
  std::filesystem::remove(path);
  CHECK(parse_time_mode("virtual") == TimeMode::Virtual);
  CHECK_THROWS_AS(parse_time_mode("fast"), Error);
}

TEST_CASE("wall mode stamps events itself") {
  ServiceConfig cfg;
  cfg.time_mode = TimeMode::Wall;
  ControlService svc(cfg);
  svc.handle_line(std::string("LOAD ") + testing_support::bsn_text());
  svc.handle_line("EVENT cycle_starting");
  svc.handle_line("EVENT request");
  json s = state_of(svc, "0");
  CHECK(s["properties"][0]["current"] == "waiting_1");
  CHECK(s["pending_timer"].get<TimeMs>() == s["properties"][0]["clock_reset_at"].get<TimeMs>() + 2001);
  svc.poll_timers();
  CHECK(svc.handle_line("VERDICT 0") == "OK Running");
}
