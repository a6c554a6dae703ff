#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kces/injector.hpp"
#include "kces/metrics.hpp"
#include "kces/sim.hpp"

namespace kces {

enum class Pattern { Constant, Linear, Pyramid };
std::string to_string(Pattern p);
Pattern parse_pattern(const std::string& s);

struct PatternParams {
  Pattern kind = Pattern::Constant;
  int batch = 2;  // constant
  int k = 1;      // linear increment
  int d = 1;      // linear first burst
  int peak = 3;   // pyramid
  int total = 10;
  Millis interval_ms = kDefaultInterval;

  ArrivalSchedule schedule() const;
  friend bool operator==(const PatternParams&, const PatternParams&) = default;
};

struct ExperimentConfig {
  std::string cluster_path;   // empty: bundled default cluster
  std::string workload_path;  // empty: generate from `pattern`
  PatternParams pattern;
  std::vector<Strategy> strategies{Strategy::KCES, Strategy::FCFS};
  Recovery recovery = Recovery::Roam;
  std::vector<std::uint64_t> seeds{1};
  Latencies latency;
  MiB beta = 20;
  MiB mem_floor = 100;
  std::int64_t millicore_throughput = 1000;
  std::int64_t instructions_per_millicore = 1000;
  std::size_t event_budget = 1'000'000;
  std::string output_dir = "kces-out";

  /// Throws Error{ConfigError} (or IoError for missing files).
  void validate() const;
  SimConfig sim_config(Strategy strategy, std::uint64_t seed) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

struct RunOutcome {
  Strategy strategy = Strategy::KCES;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string directory;
  RunSummary summary;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::string report;  // comparison text
  int exit_code = 0;   // nonzero iff any run failed
};

/// Workload for one seed: the workload file when given, else the generator.
Workload experiment_workload(const ExperimentConfig& cfg, std::uint64_t seed);
Cluster experiment_cluster(const ExperimentConfig& cfg);

/// Runs every seed x strategy and writes <out>/<strategy>-seed<k>/{trace.ndjson,
/// summary.json,timeseries.csv}, plus comparison.txt and config.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace kces
