#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kces/model.hpp"

namespace kces {

inline constexpr Millis kDefaultInterval = 300'000;

struct Burst {
  Millis time_ms = 0;
  int count = 0;

  friend bool operator==(const Burst&, const Burst&) = default;
};

struct ArrivalSchedule {
  std::vector<Burst> bursts;
  int total = 0;
};

/// `batch` workflows every interval. Throws IndivisibleTotal.
ArrivalSchedule constant_schedule(int batch, int total, Millis interval_ms = kDefaultInterval);

/// Bursts of d, d+k, d+2k, ...; the final burst is cut so the sum is `total`.
ArrivalSchedule linear_schedule(int k, int d, int total, Millis interval_ms = kDefaultInterval);

/// Bursts climb 1..peak, fall back to 1 and repeat; the final burst is cut so
/// the sum is `total`.
ArrivalSchedule pyramid_schedule(int peak, int total, Millis interval_ms = kDefaultInterval);

struct TaskProfile {
  Bytes data_volume = 0;
  Rational instructions_per_byte{1};
  Millicores cpu = 0;
  MiB mem = 0;
  MiB mem_min = 0;
  Millis duration = 0;
  Millis deadline = 0;
  std::string image_id;
  Bytes image_size = 0;
};

/// Shape and per-task resources of the IoT workflow: a cloud deployment task,
/// an edge collection layer, an edge processing layer, a cloud aggregation
/// task, a second collection/processing pair and a cloud decision task.
struct IotWorkflowParams {
  // collect-1, process-1, collect-2, process-2
  std::array<int, 4> edge_layers{8, 3, 3, 4};
  std::vector<std::string> scenes{"edge-1", "edge-2"};
  TaskProfile cloud;
  TaskProfile collect;
  TaskProfile process;
  // Per-task data volume is perturbed uniformly by up to this percentage.
  int data_jitter_pct = 10;

  static IotWorkflowParams defaults();
  int task_count() const { return 3 + edge_layers[0] + edge_layers[1] + edge_layers[2] + edge_layers[3]; }
};

WorkflowSpec build_iot_workflow(const std::string& workflow_id, const IotWorkflowParams& params,
                                std::uint64_t seed = 0);

/// One IoT workflow per scheduled arrival, ids wf-0, wf-1, ...
Workload make_workload(const ArrivalSchedule& schedule, const IotWorkflowParams& params, std::uint64_t seed = 0);

}  // namespace kces
