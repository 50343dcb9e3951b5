#pragma once

#include "adaptrv/control_service.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace adaptrv {

/// JSON mirror of the line protocol plus a server-sent event stream.
///
///   POST   /sessions                     {"requirement": "..."} | {"observer": {...}}
///   GET    /sessions                     {"sessions": [snapshot...]}
///   GET    /sessions/{id}                snapshot
///   DELETE /sessions/{id}
///   POST   /sessions/{id}/events         {"type", "timestamp"} | {"events": [...]}
///   POST   /sessions/{id}/adaptations    {"command": "..."} | {"kind", ...}
///   POST   /events                       event for every session
///   POST   /tick                         {"timestamp"}
///   GET    /stream                       text/event-stream of notifications
///   GET    /health
class HttpServer {
public:
  explicit HttpServer(ControlService &service);
  ~HttpServer();

  /// Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string &host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();

private:
  void routes();

  ControlService &service_;
  std::unique_ptr<httplib::Server> server_;
};

/// Splits "host:port".
std::pair<std::string, int> split_listen(const std::string &listen);

} // namespace adaptrv
