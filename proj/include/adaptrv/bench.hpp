#pragma once

#include "adaptrv/event.hpp"
#include "adaptrv/observer.hpp"
#include "adaptrv/pattern.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace adaptrv {

/// The nine pattern/scope combinations used by the correctness and size
/// experiments, with their labels.
struct NamedPattern {
  std::string name;
  PatternInstance pattern;
};
std::vector<NamedPattern> reference_patterns();

/// Body-sensor-network requirement the adaptation scenario starts from.
PatternInstance bsn_requirement();

/// 5 states x 5 event types, one transition per pair.
Observer artificial_observer();

struct SizeRow {
  std::string name;
  std::size_t states = 0, transitions = 0;
  std::size_t reference_states = 0, reference_transitions = 0;
};

struct Rq1Report {
  std::size_t traces = 0;
  std::size_t events_per_trace = 0;
  std::size_t artificial_states = 0, artificial_transitions = 0;
  double mean_ms_per_event = 0, stdev_ms_per_event = 0;
  double ceiling_ms_per_event = 0.13;
  std::vector<SizeRow> sizes;
  bool passed() const;
};

struct Rq2Mismatch {
  std::string pattern;
  std::string label;
  std::uint64_t seed = 0;
  std::string detail; // divergence position
};

struct Rq2Report {
  std::size_t total = 0, correct = 0;
  std::size_t true_violations = 0, true_satisfactions = 0;
  std::size_t false_violations = 0, missed_violations = 0;
  std::vector<Rq2Mismatch> mismatches;
  bool passed() const { return correct == total && total > 0; }
};

struct Rq3Report {
  std::size_t rounds = 0, changes = 0;
  std::vector<double> adapt_round_ms, redeploy_round_ms;
  double adapt_mean_ms = 0, redeploy_mean_ms = 0; // per change
  double adapt_stdev_ms = 0, redeploy_stdev_ms = 0; // of round totals
  double ratio = 0;                                 // redeploy / adapt
  std::size_t validation_failures = 0, structure_mismatches = 0;
  bool passed() const;
};

struct BsnCheckpoint {
  std::size_t row = 0;
  std::string change;
  std::vector<std::string> expected_states, actual_states;
  std::vector<std::string> rendered;
  bool mtl_ok = false, structure_ok = false, state_ok = false;
};

struct BsnReport {
  std::vector<BsnCheckpoint> checkpoints;
  std::string final_verdict;
  bool passed() const;
};

Rq1Report run_rq1(std::size_t traces = 10, std::size_t events = 50000,
                  std::uint64_t seed = 1);
Rq2Report run_rq2(std::size_t per_label = 10, std::size_t length = 60);
Rq3Report run_rq3(std::size_t rounds = 10, std::size_t changes = 3000,
                  std::uint64_t seed = 7);
BsnReport run_bsn_scenario();

nlohmann::json to_json(const Rq1Report &r);
nlohmann::json to_json(const Rq2Report &r);
nlohmann::json to_json(const Rq3Report &r);
nlohmann::json to_json(const BsnReport &r);

/// Expected rendering of each scenario row (row 5 lists both split parts).
std::vector<std::vector<std::string>> bsn_expected_formulas();

} // namespace adaptrv
