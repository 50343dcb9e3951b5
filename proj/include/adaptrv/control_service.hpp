#pragma once

#include "adaptrv/pap_engine.hpp"
#include "adaptrv/rv_engine.hpp"

#include <json.hpp>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace adaptrv {

enum class TimeMode { Virtual, Wall };

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  TimeMode time_mode = TimeMode::Virtual;
  std::string log_level = "info";
  std::size_t push_capacity = 1024;

  /// Reads a JSON config file; unknown keys are ignored.
  static ServiceConfig from_file(const std::filesystem::path &path);
};

TimeMode parse_time_mode(std::string_view text);

/// Bounded notification buffer. Publishing never blocks; when full the
/// oldest message is dropped and counted.
class NotificationHub {
public:
  explicit NotificationHub(std::size_t capacity = 1024) : capacity_(capacity) {}

  void publish(nlohmann::json message);
  /// Messages with sequence number > `after`, waiting up to `timeout` for one.
  std::vector<nlohmann::json> since(std::uint64_t after,
                                    std::chrono::milliseconds timeout = {});
  std::uint64_t last_sequence() const;
  std::uint64_t dropped() const;
  void close();
  bool closed() const;

private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<nlohmann::json> buffer_;
  std::size_t capacity_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

/// Session registry behind both transports. Every public member is
/// serialized by one mutex.
class ControlService {
public:
  explicit ControlService(ServiceConfig config = {});

  const ServiceConfig &config() const { return config_; }
  NotificationHub &hub() { return hub_; }

  /// Structured English, or "@path" naming an observer JSON document.
  nlohmann::json load(const std::string &source);
  nlohmann::json load_observer(const nlohmann::json &document);
  /// Feeds one event to every session (or only `session`).
  nlohmann::json event(std::optional<TimeMs> timestamp, const std::string &type,
                       const std::optional<std::string> &session = {});
  nlohmann::json tick(std::optional<TimeMs> timestamp);
  /// `target` is "<session>" or "<session>.<k>".
  nlohmann::json adapt(const std::string &target, const AdaptationRule &rule);
  nlohmann::json state(const std::string &session) const;
  nlohmann::json verdict(const std::string &session) const;
  nlohmann::json list() const;
  nlohmann::json remove(const std::string &session);
  nlohmann::json save(const std::filesystem::path &path) const;
  nlohmann::json restore(const std::filesystem::path &path);

  /// Fires timers that are due by the wall clock; no-op in virtual time.
  void poll_timers();
  TimeMs now() const;

  /// One protocol line in, one reply line out ("OK ..." or "ERR CODE msg").
  std::string handle_line(const std::string &line);

private:
  MonitorSession &find(const std::string &id) const;
  std::string create(std::vector<MonitoredProperty> props);
  nlohmann::json snapshot(const MonitorSession &s) const;
  void attach(MonitorSession &s);
  TimeMs wall_now() const;
  TimeMs event_time(std::optional<TimeMs> ts) const;

  ServiceConfig config_;
  NotificationHub hub_;
  mutable std::recursive_mutex mu_;
  std::map<std::string, std::unique_ptr<MonitorSession>, std::less<>> sessions_;
  std::uint64_t next_id_ = 0;
  TimeMs virtual_now_ = 0;
  std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();
};

/// Reads commands from `in` until EOF or QUIT, writing replies (and, with
/// `push`, NOTIFY lines) to `out`.
void run_stdio(ControlService &service, std::istream &in, std::ostream &out, bool push);

} // namespace adaptrv
