#include "adaptrv/http_server.hpp"

#include "adaptrv/error.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace adaptrv {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::UnknownSession: return 404;
  case ErrorCode::SyntaxError:
  case ErrorCode::UnknownPattern:
  case ErrorCode::InvalidPattern:
  case ErrorCode::UnsupportedCombination:
  case ErrorCode::BadCommand:
  case ErrorCode::ParseError: return 400;
  case ErrorCode::TimeRegression:
  case ErrorCode::WrongPattern:
  case ErrorCode::BadIndex:
  case ErrorCode::NoTimeBound:
  case ErrorCode::UnknownEvent:
  case ErrorCode::NameCollision: return 409;
  default: return 500;
  }
}

void reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response &res, ErrorCode code, const std::string &message) {
  reply(res, status_for(code),
        {{"error", {{"code", to_string(code)}, {"message", message}}}});
}

// Runs `fn`, translating exceptions into JSON error replies.
template <class Fn> void guarded(httplib::Response &res, Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    fail(res, e.code(), e.what());
  } catch (const json::exception &e) {
    fail(res, ErrorCode::BadCommand, std::string("malformed JSON body: ") + e.what());
  } catch (const std::exception &e) {
    fail(res, ErrorCode::BadCommand, e.what());
  }
}

json body_of(const httplib::Request &req) {
  if (req.body.empty())
    return json::object();
  return json::parse(req.body);
}

std::optional<TimeMs> timestamp_of(const json &j) {
  if (!j.contains("timestamp") || j["timestamp"].is_null())
    return std::nullopt;
  return j["timestamp"].get<TimeMs>();
}

AdaptationRule rule_of(const json &j) {
  if (j.contains("command"))
    return parse_adaptation(j["command"].get<std::string>());
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "UPDATE_GUARD") {
    std::optional<std::size_t> which;
    if (j.contains("index") && !j["index"].is_null())
      which = j["index"].get<std::size_t>();
    return AdaptationRule::update_time_guard(j.at("bound_ms").get<TimeMs>(), which);
  }
  if (kind == "UPDATE_EVENT")
    return AdaptationRule::update_event(j.at("old").get<std::string>(),
                                        j.at("new").get<std::string>());
  if (kind == "ADD_RESPONSE")
    return AdaptationRule::add_response(j.at("event").get<std::string>(),
                                        j.at("bound_ms").get<TimeMs>());
  if (kind == "REMOVE_RESPONSE")
    return AdaptationRule::remove_response(j.at("index").get<std::size_t>());
  if (kind == "SPLIT")
    return AdaptationRule::split_chain();
  throw Error(ErrorCode::BadCommand, "unknown adaptation kind '" + kind + "'");
}

} // namespace

std::pair<std::string, int> split_listen(const std::string &listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::BadCommand, "listen address must be host:port");
  try {
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
  } catch (const std::exception &) {
    throw Error(ErrorCode::BadCommand, "bad port in '" + listen + "'");
  }
}

HttpServer::HttpServer(ControlService &service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
  if (port == 0)
    return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() {
  service_.hub().close();
  if (server_)
    server_->stop();
}

void HttpServer::routes() {
  auto &svr = *server_;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  svr.Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });

  svr.Get("/health", [this](const httplib::Request &, httplib::Response &res) {
    reply(res, 200,
          {{"status", "ok"},
           {"time_mode", service_.config().time_mode == TimeMode::Wall ? "wall" : "virtual"},
           {"now", service_.now()},
           {"dropped_notifications", service_.hub().dropped()}});
  });

  svr.Post("/sessions", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      json b = body_of(req);
      if (b.contains("observer"))
        reply(res, 201, service_.load_observer(b["observer"]));
      else
        reply(res, 201, service_.load(b.at("requirement").get<std::string>()));
    });
  });

  svr.Get("/sessions", [this](const httplib::Request &, httplib::Response &res) {
    guarded(res, [&] { reply(res, 200, {{"sessions", service_.list()}}); });
  });

  svr.Get(R"(/sessions/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { reply(res, 200, service_.state(req.matches[1])); });
  });

  svr.Delete(R"(/sessions/([^/]+))",
             [this](const httplib::Request &req, httplib::Response &res) {
               guarded(res, [&] { reply(res, 200, service_.remove(req.matches[1])); });
             });

  svr.Post(R"(/sessions/([^/]+)/events)",
           [this](const httplib::Request &req, httplib::Response &res) {
             guarded(res, [&] {
               std::string id = req.matches[1];
               json b = body_of(req);
               json events = b.contains("events") ? b["events"] : json::array({b});
               for (const auto &e : events)
                 service_.event(timestamp_of(e), e.at("type").get<std::string>(), id);
               reply(res, 200, service_.state(id));
             });
           });

  svr.Post(R"(/sessions/([^/]+)/adaptations)",
           [this](const httplib::Request &req, httplib::Response &res) {
             guarded(res, [&] {
               json b = body_of(req);
               std::string target = req.matches[1];
               if (b.contains("property") && !b["property"].is_null())
                 target += "." + std::to_string(b["property"].get<std::size_t>());
               reply(res, 200, service_.adapt(target, rule_of(b)));
             });
           });

  svr.Post("/events", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      json b = body_of(req);
      reply(res, 200, service_.event(timestamp_of(b), b.at("type").get<std::string>()));
    });
  });

  svr.Post("/tick", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { reply(res, 200, service_.tick(timestamp_of(body_of(req)))); });
  });

  svr.Get("/stream", [this](const httplib::Request &req, httplib::Response &res) {
    std::uint64_t start = service_.hub().last_sequence();
    if (req.has_header("Last-Event-ID"))
      start = std::stoull(req.get_header_value("Last-Event-ID"));
    else if (req.has_param("after"))
      start = std::stoull(req.get_param_value("after"));
    auto seen = std::make_shared<std::uint64_t>(start);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, seen](std::size_t, httplib::DataSink &sink) {
          auto batch = service_.hub().since(*seen, std::chrono::milliseconds(500));
          std::string chunk;
          for (const auto &m : batch) {
            *seen = m["seq"].get<std::uint64_t>();
            chunk += "id: " + std::to_string(*seen) + "\nevent: " +
                     m["kind"].get<std::string>() + "\ndata: " + m.dump() + "\n\n";
          }
          if (chunk.empty())
            chunk = ": keep-alive\n\n";
          if (!sink.write(chunk.data(), chunk.size()))
            return false;
          if (service_.hub().closed()) {
            sink.done();
            return false;
          }
          return true;
        });
  });

  svr.set_exception_handler(
      [](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception &e) {
          fail(res, ErrorCode::BadCommand, e.what());
        }
      });
}

} // namespace adaptrv
