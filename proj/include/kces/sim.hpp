#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kces/collab.hpp"
#include "kces/engine.hpp"
#include "kces/model.hpp"
#include "kces/store.hpp"

namespace kces {

enum class Strategy { KCES, FCFS };
enum class Recovery { None, Roam, Offload, RoamThenOffload };

std::string to_string(Strategy s);
std::string to_string(Recovery r);
Strategy parse_strategy(const std::string& s);  // "kces" | "fcfs"
Recovery parse_recovery(const std::string& s);  // "none" | "roam" | "offload" | "roam-offload"

/// Control-plane delays applied by the kernel.
struct Latencies {
  Millis oom_detection = 21'000;  // PodStart -> OomDetected
  Millis pod_delete = 5'000;      // OomDetected -> PodDeleted
  Millis reallocate = 7'000;      // PodDeleted -> TaskReady of the new incarnation
  Millis pod_start = 0;           // AllocationGranted -> PodStart
  Millis retry = 1'000;           // scheduler retry tick when waiters remain and nothing else is pending

  friend bool operator==(const Latencies&, const Latencies&) = default;
};

struct SimConfig {
  Strategy strategy = Strategy::KCES;
  Recovery recovery = Recovery::Roam;
  EngineConfig engine;
  Latencies latency;
  std::uint64_t seed = 0;  // recorded in the trace; the kernel itself draws no randomness
  std::size_t event_budget = 1'000'000;
  bool dump_store = false;  // append the final task store to the trace

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Declaration order is the tie-break priority for events sharing a timestamp.
enum class EventKind { OomDetected, PodDeleted, PodFinish, TaskReady, WorkflowArrival, AllocationGranted, PodStart, TaskRequeue };

std::string to_string(EventKind k);

struct SimEvent {
  Millis time_ms = 0;
  EventKind kind = EventKind::TaskRequeue;
  std::uint64_t seq = 0;
  std::string workflow_id;
  std::string task_id;
  int incarnation = 0;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// Newline-delimited records with a stable field order.
struct Trace {
  std::vector<nlohmann::ordered_json> records;

  std::string to_ndjson() const;
  static Trace from_ndjson(std::string_view text);
};

/// Discrete-event kernel. Not thread-safe; independent instances share nothing.
class Simulator {
 public:
  Simulator(Cluster cluster, Workload workload, SimConfig cfg);

  bool done() const { return queue_.empty(); }
  const SimEvent& peek() const { return queue_.top(); }
  Millis now() const { return now_; }

  /// Applies the queue head and returns the events it scheduled.
  std::vector<SimEvent> step();

  /// Runs to quiescence. Throws Error{Nonterminating} past the event budget.
  Trace run();

  const ClusterState& state() const { return state_; }
  const TaskStore& store() const { return store_; }
  const Trace& trace() const { return trace_; }
  std::size_t events_processed() const { return processed_; }

 private:
  struct TaskStatus {
    int incarnation = 0;
    bool ready = false;
    bool waiting = false;
    bool done = false;
    bool failed = false;
    bool recovering = false;
    Millis ready_ms = 0;     // when the current incarnation became ready
    Millis earliest_ms = 0;  // no start before this (re-allocation delay)
    Millis finish_ms = -1;
  };
  struct WorkflowRun {
    WorkflowSpec spec;
    Millis arrival_ms = 0;
    bool arrived = false;
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> children;
    std::map<std::string, TaskStatus> tasks;
    std::size_t finished = 0;
    bool failed = false;
  };
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const;
  };
  struct Admission;
  enum class Outcome { Admitted, Waiting, Failed };

  void push(Millis t, EventKind kind, const std::string& wf = {}, const std::string& task = {}, int inc = 0);
  void schedule_requeue(Millis t);
  nlohmann::ordered_json& record(const char* event);

  void on_arrival(const SimEvent& e);
  void on_task_ready(const SimEvent& e);
  void on_granted(const SimEvent& e);
  void on_pod_start(const SimEvent& e);
  void on_pod_finish(const SimEvent& e);
  void on_oom(const SimEvent& e);
  void on_pod_deleted(const SimEvent& e);
  void on_requeue(const SimEvent& e);

  Admission decide(const std::string& wf, const TaskSpec& task, const NodeSpec& node, const TaskStatus& st);
  Outcome try_admit(const std::string& wf, const std::string& task_id);
  void enqueue_waiter(const std::string& wf, const std::string& task_id, const std::string& reason);
  bool node_has_waiters(const std::string& ip) const;
  void fail_descendants(WorkflowRun& run, const std::string& task_id);
  void fail_task(const std::string& wf, const std::string& task_id, const std::string& reason);
  void project(WorkflowRun& run);
  Millis estimated_runtime(const TaskSpec& task, const NodeSpec& node, Millicores cpu) const;
  const NodeSpec& gateway(const TaskSpec& task, const NodeSpec& host) const;
  void check_invariants() const;
  void finish_run();

  SimConfig cfg_;
  ClusterState state_;
  TaskStore store_;
  NodeTaskImageMap images_;
  std::map<std::string, WorkflowRun> runs_;
  std::vector<std::string> run_order_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::deque<std::pair<std::string, std::string>> waiters_;
  std::vector<SimEvent> emitted_;
  std::map<PodKey, Millis> runtimes_;
  std::map<PodKey, nlohmann::ordered_json> grants_;
  std::optional<Millis> requeue_at_;
  Trace trace_;
  Millis now_ = 0;
  std::uint64_t seq_ = 0;
  std::size_t processed_ = 0;
  std::size_t task_total_ = 0;
  bool retry_armed_ = true;
  bool finished_ = false;
};

/// Convenience wrapper: one Simulator run to quiescence.
Trace run(const Cluster& cluster, const Workload& workload, const SimConfig& cfg);

/// Order-sensitive fingerprint of cluster and workload; runs are only
/// comparable when their fingerprints match.
std::string config_fingerprint(const Cluster& cluster, const Workload& workload);

}  // namespace kces
