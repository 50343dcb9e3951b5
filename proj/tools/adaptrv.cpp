#include "adaptrv/bench.hpp"
#include "adaptrv/control_service.hpp"
#include "adaptrv/error.hpp"
#include "adaptrv/http_server.hpp"
#include "adaptrv/observer_io.hpp"
#include "adaptrv/oracle.hpp"
#include "adaptrv/psp_catalog.hpp"
#include "adaptrv/rv_engine.hpp"
#include "adaptrv/trace_tools.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ranges.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace adaptrv;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

std::string read_pattern_arg(const std::string &arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
      text.pop_back();
    return text;
  }
  return arg;
}

void setup_logging(const std::string &level) {
  auto logger = spdlog::stderr_color_mt("adaptrv");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

ServiceConfig service_config(const std::string &config_path, const std::string &listen,
                             const std::string &time_mode, const std::string &log_level) {
  ServiceConfig c = config_path.empty() ? ServiceConfig{} : ServiceConfig::from_file(config_path);
  if (!listen.empty())
    c.listen = listen;
  if (!time_mode.empty())
    c.time_mode = parse_time_mode(time_mode);
  if (!log_level.empty())
    c.log_level = log_level;
  return c;
}

int print_report(const json &report, const std::string &json_path) {
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    out << report.dump(2) << '\n';
  }
  return report.value("passed", false) ? 0 : 1;
}

int bench(const std::string &which, const std::string &json_path) {
  if (which == "rq1") {
    Rq1Report r = run_rq1();
    fmt::print("artificial observer: {} states, {} transitions\n", r.artificial_states,
               r.artificial_transitions);
    fmt::print("{} traces x {} events: mean {:.6f} ms/event (sd {:.6f}), ceiling {} ms\n",
               r.traces, r.events_per_trace, r.mean_ms_per_event, r.stdev_ms_per_event,
               r.ceiling_ms_per_event);
    fmt::print("{:<38} {:>6} {:>6} {:>10} {:>10}\n", "pattern", "#S", "#T", "ref #S", "ref #T");
    for (const auto &s : r.sizes)
      fmt::print("{:<38} {:>6} {:>6} {:>10} {:>10}{}\n", s.name, s.states, s.transitions,
                 s.reference_states, s.reference_transitions,
                 s.states == s.reference_states && s.transitions == s.reference_transitions
                     ? ""
                     : "  (differs)");
    return print_report(to_json(r), json_path);
  }
  if (which == "rq2") {
    Rq2Report r = run_rq2();
    fmt::print("classified {}/{} traces correctly\n", r.correct, r.total);
    fmt::print("violations {} detected, {} missed; satisfactions {} kept, {} false alarms\n",
               r.true_violations, r.missed_violations, r.true_satisfactions,
               r.false_violations);
    for (const auto &m : r.mismatches)
      fmt::print("  mismatch: {} {} seed {}: {}\n", m.pattern, m.label, m.seed, m.detail);
    return print_report(to_json(r), json_path);
  }
  if (which == "rq3") {
    Rq3Report r = run_rq3();
    fmt::print("{} rounds x {} changes\n", r.rounds, r.changes);
    fmt::print("adapt    {:.6f} ms/change (round sd {:.3f} ms)\n", r.adapt_mean_ms,
               r.adapt_stdev_ms);
    fmt::print("redeploy {:.6f} ms/change (round sd {:.3f} ms)\n", r.redeploy_mean_ms,
               r.redeploy_stdev_ms);
    fmt::print("redeploy/adapt ratio {:.2f}; validation failures {}, structure mismatches {}\n",
               r.ratio, r.validation_failures, r.structure_mismatches);
    return print_report(to_json(r), json_path);
  }
  if (which == "bsn") {
    BsnReport r = run_bsn_scenario();
    for (const auto &c : r.checkpoints) {
      fmt::print("row {} ({}): states [{}] expected [{}] mtl {} structure {}\n", c.row,
                 c.change, fmt::join(c.actual_states, ", "),
                 fmt::join(c.expected_states, ", "), c.mtl_ok ? "ok" : "MISMATCH",
                 c.structure_ok ? "ok" : "MISMATCH");
      for (const auto &f : c.rendered)
        fmt::print("    {}\n", f);
    }
    fmt::print("final verdict {}\n", r.final_verdict);
    return print_report(to_json(r), json_path);
  }
  throw Error(ErrorCode::BadCommand, "unknown experiment '" + which + "'");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Adaptive runtime verification of pattern-based requirements"};
  app.require_subcommand(1);

  std::string config_path, listen, time_mode, log_level;
  bool push = false;

  auto *serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_path, "JSON config file");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--time-mode", time_mode, "virtual or wall");
  serve->add_option("--log-level", log_level, "trace, debug, info, warn, error");

  auto *stdio = app.add_subcommand("stdio", "Run the line protocol on stdin/stdout");
  stdio->add_option("--config", config_path, "JSON config file");
  stdio->add_option("--time-mode", time_mode, "virtual or wall");
  stdio->add_option("--log-level", log_level, "trace, debug, info, warn, error");
  stdio->add_flag("--push", push, "Interleave NOTIFY lines with replies");

  std::string requirement;
  bool with_observer = false;
  auto *compile = app.add_subcommand("compile", "Print the MTL formula and observer");
  compile->add_option("requirement", requirement, "Structured English or a file")->required();
  compile->add_flag("--observer", with_observer, "Also print the observer as JSON");

  std::string trace_path;
  auto *check = app.add_subcommand("check", "Verify a trace file against a requirement");
  check->add_option("--pattern", requirement, "Structured English or a file")->required();
  check->add_option("--trace", trace_path, "Trace file")->required();

  std::string label = "sat", out_path;
  std::uint64_t seed = 1;
  std::size_t length = 60;
  auto *tracegen = app.add_subcommand("tracegen", "Generate a labeled trace");
  tracegen->add_option("--pattern", requirement, "Structured English or a file")->required();
  tracegen->add_option("--label", label, "sat or viol");
  tracegen->add_option("--seed", seed, "Seed");
  tracegen->add_option("--length", length, "Approximate number of events");
  tracegen->add_option("--out", out_path, "Output file (stdout when omitted)");

  std::string experiment, json_path;
  auto *bench_cmd = app.add_subcommand("bench", "Run an experiment");
  bench_cmd->add_option("experiment", experiment, "rq1, rq2, rq3 or bsn")
      ->required()
      ->check(CLI::IsMember({"rq1", "rq2", "rq3", "bsn"}));
  bench_cmd->add_option("--json", json_path, "Write the report as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve || *stdio) {
      ServiceConfig cfg = service_config(config_path, listen, time_mode, log_level);
      setup_logging(cfg.log_level);
      ControlService service(cfg);
      std::thread ticker;
      if (cfg.time_mode == TimeMode::Wall)
        ticker = std::thread([&] {
          while (!g_stop) {
            service.poll_timers();
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
          }
        });
      if (*stdio) {
        run_stdio(service, std::cin, std::cout, push);
      } else {
        HttpServer server(service);
        auto [host, port] = split_listen(cfg.listen);
        int bound = server.bind(host, port);
        spdlog::info("listening on {}:{}", host, bound);
        static HttpServer *running = &server;
        std::signal(SIGINT, [](int) { running->stop(); });
        std::signal(SIGTERM, [](int) { running->stop(); });
        server.serve();
      }
      g_stop = true;
      if (ticker.joinable())
        ticker.join();
      return 0;
    }
    if (*compile) {
      PatternInstance p = parse_requirement(read_pattern_arg(requirement));
      fmt::print("{}\n{}\n", render_requirement(p), render(to_mtl(p)));
      if (with_observer)
        fmt::print("{}\n", document_to_json({instantiate_observer(p), p}).dump(2));
      return 0;
    }
    if (*check) {
      PatternInstance p = parse_requirement(read_pattern_arg(requirement));
      Trace trace = read_trace(trace_path);
      MonitorSession session("check", p);
      RunResult run = session.run_virtual(trace, false);
      fmt::print("verdict {}", to_string(run.verdict));
      if (run.violation_at)
        fmt::print(" at {}", *run.violation_at);
      fmt::print("\noracle {}\n", to_string(evaluate(p, trace)));
      return run.verdict == Verdict::Violated ? 2 : 0;
    }
    if (*tracegen) {
      PatternInstance p = parse_requirement(read_pattern_arg(requirement));
      Trace trace = generate(p, parse_label(label), seed, length);
      if (out_path.empty())
        format_trace(std::cout, trace);
      else
        write_trace(trace, out_path);
      return 0;
    }
    if (*bench_cmd)
      return bench(experiment, json_path);
  } catch (const Error &e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
