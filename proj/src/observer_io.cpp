#include "adaptrv/observer_io.hpp"

#include "adaptrv/error.hpp"
#include "adaptrv/psp_catalog.hpp"

#include <fstream>

namespace adaptrv {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string &what) {
  throw Error(ErrorCode::ParseError, "malformed observer document: " + what);
}

json optional_time(std::optional<TimeMs> t) { return t ? json(*t) : json(nullptr); }

std::optional<TimeMs> read_optional_time(const json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::nullopt;
  return j.at(key).get<TimeMs>();
}

} // namespace

json observer_to_json(const Observer &obs, bool with_run_state) {
  json ts = json::array();
  for (const auto &t : obs.transitions()) {
    json jt = {{"source", t.source}, {"target", t.target}, {"reset", t.reset}};
    if (t.label)
      jt["label"] = *t.label;
    if (t.guard)
      jt["guard"] = {{"op", t.guard->op == GuardOp::AtMost ? "<=" : ">"},
                     {"bound_ms", t.guard->bound_ms}};
    ts.push_back(std::move(jt));
  }
  json j = {{"states", obs.states()},
            {"initial", obs.initial()},
            {"error", obs.error()},
            {"clock", "c"},
            {"transitions", std::move(ts)}};
  if (with_run_state) {
    j["current"] = obs.current();
    j["clock_reset_at"] = optional_time(obs.clock_reset_at());
    j["last_time"] = optional_time(obs.last_time());
    j["violated"] = obs.violated();
  }
  return j;
}

Observer observer_from_json(const json &j) {
  try {
    std::vector<Transition> ts;
    for (const auto &jt : j.at("transitions")) {
      Transition t;
      t.source = jt.at("source").get<std::string>();
      t.target = jt.at("target").get<std::string>();
      t.reset = jt.value("reset", false);
      if (jt.contains("label") && !jt.at("label").is_null())
        t.label = jt.at("label").get<std::string>();
      if (jt.contains("guard") && !jt.at("guard").is_null()) {
        const auto &g = jt.at("guard");
        auto op = g.at("op").get<std::string>();
        if (op != "<=" && op != ">")
          malformed("guard op '" + op + "'");
        t.guard = Guard{op == "<=" ? GuardOp::AtMost : GuardOp::Exceeds,
                        g.at("bound_ms").get<TimeMs>()};
      }
      ts.push_back(std::move(t));
    }
    Observer obs(j.at("states").get<std::vector<std::string>>(),
                 j.at("initial").get<std::string>(), j.at("error").get<std::string>(),
                 std::move(ts));
    if (j.contains("current"))
      obs.set_run_state(j.at("current").get<std::string>(),
                        read_optional_time(j, "clock_reset_at"),
                        read_optional_time(j, "last_time"));
    return obs;
  } catch (const json::exception &e) {
    malformed(e.what());
  }
}

json document_to_json(const ObserverDocument &doc) {
  json j = observer_to_json(doc.observer);
  if (doc.pattern)
    j["pattern"] = render_requirement(*doc.pattern);
  return j;
}

ObserverDocument document_from_json(const json &j) {
  ObserverDocument doc{observer_from_json(j), std::nullopt};
  if (j.contains("pattern") && j.at("pattern").is_string())
    doc.pattern = parse_requirement(j.at("pattern").get<std::string>());
  return doc;
}

void save_document(const std::filesystem::path &path, const ObserverDocument &doc) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << document_to_json(doc).dump(2) << '\n';
}

ObserverDocument load_document(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    malformed(e.what());
  }
  return document_from_json(j);
}

} // namespace adaptrv
