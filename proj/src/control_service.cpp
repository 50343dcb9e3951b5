#include "adaptrv/control_service.hpp"

#include "adaptrv/error.hpp"
#include "adaptrv/observer_io.hpp"
#include "adaptrv/psp_catalog.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace adaptrv {

using nlohmann::json;

TimeMode parse_time_mode(std::string_view text) {
  if (text == "virtual")
    return TimeMode::Virtual;
  if (text == "wall")
    return TimeMode::Wall;
  throw Error(ErrorCode::BadCommand, "time mode must be virtual or wall");
}

ServiceConfig ServiceConfig::from_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  ServiceConfig c;
  try {
    json j = json::parse(in);
    c.listen = j.value("listen", c.listen);
    c.time_mode = parse_time_mode(j.value("time_mode", std::string("virtual")));
    c.log_level = j.value("log_level", c.log_level);
    c.push_capacity = j.value("push_capacity", c.push_capacity);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ParseError, "config " + path.string() + ": " + e.what());
  }
  return c;
}

void NotificationHub::publish(json message) {
  {
    std::lock_guard lock(mu_);
    message["seq"] = next_seq_++;
    buffer_.push_back(std::move(message));
    while (buffer_.size() > capacity_) {
      buffer_.pop_front();
      ++dropped_;
    }
  }
  cv_.notify_all();
}

std::vector<json> NotificationHub::since(std::uint64_t after,
                                         std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  auto ready = [&] { return closed_ || next_seq_ - 1 > after; };
  if (timeout.count() > 0)
    cv_.wait_for(lock, timeout, ready);
  std::vector<json> out;
  for (const auto &m : buffer_)
    if (m["seq"].get<std::uint64_t>() > after)
      out.push_back(m);
  return out;
}

std::uint64_t NotificationHub::last_sequence() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

std::uint64_t NotificationHub::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void NotificationHub::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool NotificationHub::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

ControlService::ControlService(ServiceConfig config)
    : config_(std::move(config)), hub_(config_.push_capacity) {}

TimeMs ControlService::wall_now() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - epoch_)
      .count();
}

TimeMs ControlService::now() const {
  std::lock_guard lock(mu_);
  return config_.time_mode == TimeMode::Wall ? wall_now() : virtual_now_;
}

TimeMs ControlService::event_time(std::optional<TimeMs> ts) const {
  if (config_.time_mode == TimeMode::Wall)
    return wall_now();
  if (!ts)
    throw Error(ErrorCode::BadCommand, "a timestamp is required in virtual time");
  if (*ts < virtual_now_)
    throw Error(ErrorCode::TimeRegression, "timestamp " + std::to_string(*ts) +
                                               " precedes " + std::to_string(virtual_now_));
  return *ts;
}

MonitorSession &ControlService::find(const std::string &id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return *it->second;
}

void ControlService::attach(MonitorSession &s) {
  s.set_listener([this](const SessionEvent &e) {
    if (e.kind == SessionEvent::Kind::Violation)
      return; // published by the sink together with the property
    json m = {{"session", e.session},
              {"kind", to_string(e.kind)},
              {"state", e.states.empty() ? std::string() : e.states.front()},
              {"states", e.states},
              {"timestamp", e.timestamp}};
    if (e.kind == SessionEvent::Kind::Adaptation) {
      m["old_properties"] = e.old_properties;
      m["new_properties"] = e.new_properties;
    }
    hub_.publish(std::move(m));
  });
  MonitorSession *self = &s;
  s.set_sink([this, self](const ViolationNotice &n) {
    spdlog::warn("session {} violated at {}: {}", n.session, n.timestamp, n.property);
    auto states = self->current_states();
    hub_.publish({{"session", n.session},
                  {"kind", "violation"},
                  {"state", states.empty() ? std::string() : states.front()},
                  {"states", states},
                  {"timestamp", n.timestamp},
                  {"rendered_property", n.property}});
  });
}

std::string ControlService::create(std::vector<MonitoredProperty> props) {
  std::string id = std::to_string(next_id_++);
  TimeMs start = config_.time_mode == TimeMode::Wall ? wall_now() : virtual_now_;
  auto session = std::make_unique<MonitorSession>(id, std::move(props), start);
  attach(*session);
  sessions_.emplace(id, std::move(session));
  spdlog::info("session {} deployed at {}", id, start);
  return id;
}

json ControlService::load(const std::string &source) {
  std::lock_guard lock(mu_);
  std::vector<MonitoredProperty> props;
  if (!source.empty() && source.front() == '@') {
    ObserverDocument doc = load_document(source.substr(1));
    props.push_back({std::move(doc.observer), std::move(doc.pattern)});
  } else {
    PatternInstance p = parse_requirement(source);
    props.push_back({instantiate_observer(p), p});
  }
  std::string id = create(std::move(props));
  return snapshot(find(id));
}

json ControlService::load_observer(const json &document) {
  std::lock_guard lock(mu_);
  ObserverDocument doc = document_from_json(document);
  std::vector<MonitoredProperty> props;
  props.push_back({std::move(doc.observer), std::move(doc.pattern)});
  std::string id = create(std::move(props));
  return snapshot(find(id));
}

json ControlService::event(std::optional<TimeMs> timestamp, const std::string &type,
                           const std::optional<std::string> &session) {
  std::lock_guard lock(mu_);
  if (type.empty())
    throw Error(ErrorCode::BadCommand, "event type missing");
  if (session)
    find(*session);
  TimeMs at = event_time(timestamp);
  virtual_now_ = std::max(virtual_now_, at);
  json verdicts = json::object();
  for (auto &[id, s] : sessions_) {
    if (session && id != *session)
      continue;
    s->submit_event({type, at});
    s->drain();
    verdicts[id] = to_string(s->verdict());
  }
  return {{"timestamp", at}, {"verdicts", verdicts}};
}

json ControlService::tick(std::optional<TimeMs> timestamp) {
  std::lock_guard lock(mu_);
  TimeMs at = event_time(timestamp);
  virtual_now_ = std::max(virtual_now_, at);
  for (auto &[id, s] : sessions_) {
    s->submit_tick(at);
    s->drain();
  }
  return {{"timestamp", at}};
}

void ControlService::poll_timers() {
  std::lock_guard lock(mu_);
  if (config_.time_mode != TimeMode::Wall)
    return;
  TimeMs at = wall_now();
  for (auto &[id, s] : sessions_) {
    if (auto t = s->pending_timer(); t && *t <= at) {
      s->submit_tick(at);
      s->drain();
    }
  }
}

json ControlService::adapt(const std::string &target, const AdaptationRule &rule) {
  std::lock_guard lock(mu_);
  std::string id = target;
  std::optional<std::size_t> index;
  if (auto dot = target.find('.'); dot != std::string::npos) {
    id = target.substr(0, dot);
    std::size_t k = 0;
    auto tail = target.substr(dot + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
    if (ec != std::errc() || ptr != tail.data() + tail.size())
      throw Error(ErrorCode::BadCommand, "bad property index in '" + target + "'");
    index = k;
  }
  MonitorSession &s = find(id);
  auto old_props = s.rendered_properties();
  s.request_adaptation(rule, index);
  // Drain up to and including the adaptation; an error leaves the session as
  // it was before the adaptation.
  s.drain();
  spdlog::info("session {} adapted: {}", id, to_command(rule));
  json out = snapshot(s);
  out["old_properties"] = old_props;
  out["new_properties"] = s.rendered_properties();
  out["rule"] = to_command(rule);
  return out;
}

json ControlService::snapshot(const MonitorSession &s) const {
  json props = json::array();
  TimeMs now = s.now();
  const auto &ps = s.properties();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto &o = ps[i].observer;
    json p = {{"index", i + 1},
              {"requirement", ps[i].pattern ? json(render_requirement(*ps[i].pattern)) : json()},
              {"mtl", describe(ps[i])},
              {"current", o.current()},
              {"clock_reset_at",
               o.clock_reset_at() ? json(*o.clock_reset_at()) : json(nullptr)},
              {"clock_valuation",
               o.clock_reset_at() ? json(now - *o.clock_reset_at()) : json(nullptr)},
              {"violated", o.violated()},
              {"observer", observer_to_json(o)}};
    props.push_back(std::move(p));
  }
  return {{"id", s.id()},
          {"verdict", to_string(s.verdict())},
          {"violation_at", s.violation_time() ? json(*s.violation_time()) : json(nullptr)},
          {"now", now},
          {"pending_timer", s.pending_timer() ? json(*s.pending_timer()) : json(nullptr)},
          {"relevant_events", s.relevant()},
          {"properties", std::move(props)}};
}

json ControlService::state(const std::string &session) const {
  std::lock_guard lock(mu_);
  return snapshot(find(session));
}

json ControlService::verdict(const std::string &session) const {
  std::lock_guard lock(mu_);
  const auto &s = find(session);
  return {{"id", s.id()},
          {"verdict", to_string(s.verdict())},
          {"violation_at", s.violation_time() ? json(*s.violation_time()) : json(nullptr)}};
}

json ControlService::list() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto &[id, s] : sessions_)
    out.push_back(snapshot(*s));
  return out;
}

json ControlService::remove(const std::string &session) {
  std::lock_guard lock(mu_);
  find(session);
  sessions_.erase(session);
  hub_.publish({{"session", session}, {"kind", "deleted"}, {"timestamp", virtual_now_}});
  return {{"deleted", session}};
}

json ControlService::save(const std::filesystem::path &path) const {
  std::lock_guard lock(mu_);
  json sessions = json::array();
  for (const auto &[id, s] : sessions_) {
    json props = json::array();
    for (const auto &p : s->properties())
      props.push_back(document_to_json({p.observer, p.pattern}));
    sessions.push_back({{"id", id}, {"now", s->now()}, {"properties", props}});
  }
  json doc = {{"next_id", next_id_}, {"virtual_now", virtual_now_}, {"sessions", sessions}};
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  return {{"path", path.string()}, {"sessions", sessions.size()}};
}

json ControlService::restore(const std::filesystem::path &path) {
  std::lock_guard lock(mu_);
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::map<std::string, std::unique_ptr<MonitorSession>, std::less<>> restored;
  std::uint64_t next_id = 0;
  TimeMs vnow = 0;
  try {
    json doc = json::parse(in);
    next_id = doc.at("next_id").get<std::uint64_t>();
    vnow = doc.value("virtual_now", TimeMs{0});
    for (const auto &js : doc.at("sessions")) {
      std::vector<MonitoredProperty> props;
      for (const auto &jp : js.at("properties")) {
        ObserverDocument d = document_from_json(jp);
        props.push_back({std::move(d.observer), std::move(d.pattern)});
      }
      auto id = js.at("id").get<std::string>();
      auto s = std::make_unique<MonitorSession>(id, std::move(props),
                                                js.value("now", TimeMs{0}));
      restored.emplace(id, std::move(s));
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ParseError, "snapshot " + path.string() + ": " + e.what());
  }
  sessions_ = std::move(restored);
  for (auto &[id, s] : sessions_)
    attach(*s);
  next_id_ = next_id;
  virtual_now_ = vnow;
  return {{"path", path.string()}, {"sessions", sessions_.size()}};
}

namespace {

std::optional<TimeMs> parse_time(const std::string &word) {
  TimeMs v = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc() || ptr != word.data() + word.size() || v < 0)
    return std::nullopt;
  return v;
}

std::string rest_of(const std::string &line, std::size_t words) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < words; ++i) {
    pos = line.find_first_not_of(" \t", pos);
    pos = line.find_first_of(" \t", pos);
    if (pos == std::string::npos)
      return {};
  }
  pos = line.find_first_not_of(" \t", pos);
  if (pos == std::string::npos)
    return {};
  auto end = line.find_last_not_of(" \t\r");
  return line.substr(pos, end - pos + 1);
}

std::string join(const std::vector<std::string> &xs, const std::string &sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? sep : "") + xs[i];
  return out;
}

} // namespace

std::string ControlService::handle_line(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> w;
  for (std::string s; in >> s;)
    w.push_back(s);
  if (w.empty() || w[0].front() == '#')
    return {};
  const std::string cmd = w[0];
  auto need = [&](std::size_t n) {
    if (w.size() < n + 1)
      throw Error(ErrorCode::BadCommand, cmd + " needs " + std::to_string(n) + " argument(s)");
  };
  try {
    if (cmd == "LOAD") {
      std::string src = rest_of(line, 1);
      if (src.empty())
        throw Error(ErrorCode::BadCommand, "LOAD needs a requirement or @file");
      json snap = load(src);
      std::vector<std::string> mtl;
      for (const auto &p : snap["properties"])
        mtl.push_back(p["mtl"].get<std::string>());
      return "OK " + snap["id"].get<std::string>() + " " + join(mtl, " ; ");
    }
    if (cmd == "EVENT") {
      need(1);
      if (w.size() == 2) {
        event(std::nullopt, w[1]);
      } else {
        auto ts = parse_time(w[1]);
        if (!ts)
          throw Error(ErrorCode::BadCommand, "bad timestamp '" + w[1] + "'");
        event(ts, w[2]);
      }
      return "OK";
    }
    if (cmd == "TICK") {
      std::optional<TimeMs> ts;
      if (w.size() > 1 && !(ts = parse_time(w[1])))
        throw Error(ErrorCode::BadCommand, "bad timestamp '" + w[1] + "'");
      tick(ts);
      return "OK";
    }
    if (cmd == "ADAPT") {
      need(2);
      json out = adapt(w[1], parse_adaptation(rest_of(line, 2)));
      json reply = {{"id", out["id"]},
                    {"rule", out["rule"]},
                    {"old_properties", out["old_properties"]},
                    {"new_properties", out["new_properties"]},
                    {"states", json::array()}};
      for (const auto &p : out["properties"])
        reply["states"].push_back(p["current"]);
      return "OK " + reply.dump();
    }
    if (cmd == "STATE") {
      need(1);
      return "OK " + state(w[1]).dump();
    }
    if (cmd == "VERDICT") {
      need(1);
      json v = verdict(w[1]);
      std::string out = "OK " + v["verdict"].get<std::string>();
      if (!v["violation_at"].is_null())
        out += " " + std::to_string(v["violation_at"].get<TimeMs>());
      return out;
    }
    if (cmd == "LIST") {
      json ids = json::array();
      for (const auto &s : list())
        ids.push_back(s["id"]);
      return "OK " + ids.dump();
    }
    if (cmd == "SAVE") {
      need(1);
      save(rest_of(line, 1));
      return "OK " + rest_of(line, 1);
    }
    if (cmd == "RESTORE") {
      need(1);
      json r = restore(rest_of(line, 1));
      return "OK " + std::to_string(r["sessions"].get<std::size_t>());
    }
    if (cmd == "DELETE") {
      need(1);
      remove(w[1]);
      return "OK " + w[1];
    }
    if (cmd == "QUIT")
      return "OK bye";
    throw Error(ErrorCode::BadCommand, "unknown command '" + cmd + "'");
  } catch (const Error &e) {
    spdlog::debug("{} failed: {}", cmd, e.what());
    return "ERR " + std::string(to_string(e.code())) + " " + e.what();
  } catch (const std::exception &e) {
    return "ERR BadCommand " + std::string(e.what());
  }
}

void run_stdio(ControlService &service, std::istream &in, std::ostream &out, bool push) {
  std::uint64_t seen = service.hub().last_sequence();
  for (std::string line; std::getline(in, line);) {
    service.poll_timers();
    std::string reply = service.handle_line(line);
    if (push) {
      for (const auto &m : service.hub().since(seen)) {
        seen = m["seq"].get<std::uint64_t>();
        out << "NOTIFY " << m.dump() << '\n';
      }
    }
    if (!reply.empty())
      out << reply << '\n' << std::flush;
    if (reply == "OK bye")
      break;
  }
}

} // namespace adaptrv
