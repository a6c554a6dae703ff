#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kces/model.hpp"
#include "kces/sim.hpp"

namespace kces {

/// OomDetected -> post-recovery PodFinish of one task.
struct RecoveryLifecycle {
  std::string workflow_id;
  std::string task_id;
  std::string kind;  // roam | offload | stay
  Millis start_ms = 0;
  Millis end_ms = 0;

  friend bool operator==(const RecoveryLifecycle&, const RecoveryLifecycle&) = default;
};

struct RunSummary {
  std::string strategy;
  std::string recovery;
  std::uint64_t seed = 0;
  std::string config;  // cluster + workload fingerprint
  std::size_t workflows = 0;
  std::size_t workflows_completed = 0;
  std::size_t tasks = 0;
  std::size_t tasks_succeeded = 0;
  Millis total_duration_ms = 0;
  double avg_workflow_duration_ms = 0;
  double cpu_usage_mean = 0;  // fraction of whole-cluster capacity
  double mem_usage_mean = 0;
  std::size_t oom_count = 0;
  std::size_t roam_count = 0;
  std::size_t offload_count = 0;
  double roam_pct = 0;  // percent of all tasks
  double offload_pct = 0;
  double success_rate = 0;
  std::vector<RecoveryLifecycle> recoveries;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// Throws Error{IncompleteTrace} when the run header or trailer is missing.
RunSummary summarize(const Trace& trace, const Cluster& cluster);

nlohmann::ordered_json to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

/// Minutes with one decimal, e.g. 1500000 ms -> "25.0".
std::string minutes(double ms);

struct UsageSample {
  Millis time_ms = 0;  // offset from the first arrival
  double cpu = 0;
  double mem = 0;
  std::size_t workflows = 0;  // cumulative arrivals
};

/// Allocation fractions sampled every `step_ms` across the run.
std::vector<UsageSample> time_series(const Trace& trace, const Cluster& cluster, Millis step_ms = 1000);
std::string to_csv(const std::vector<UsageSample>& samples);

struct ComparisonRow {
  std::string metric;
  double a = 0;
  double b = 0;
  double delta = 0;   // a - b
  double saving = 0;  // (b - a) / b, 0 when b is 0
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  std::vector<ComparisonRow> rows;

  std::string str() const;
};

/// Throws Error{ConfigMismatch} unless both runs share cluster and workload.
ComparisonReport compare(const RunSummary& a, const RunSummary& b);

struct Stat {
  double mean = 0;
  double stddev = 0;  // population
};

Stat aggregate(const std::vector<double>& values);

/// One column of the strategy x pattern grid.
struct GridColumn {
  std::string pattern;
  std::string strategy;
  std::vector<RunSummary> runs;
};

/// Mean and spread of the headline metrics per column, one metric per row.
std::string format_grid(const std::vector<GridColumn>& columns);

}  // namespace kces
