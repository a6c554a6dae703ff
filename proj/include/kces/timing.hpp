#pragma once

#include "kces/model.hpp"

namespace kces {

struct TimingConfig {
  // Bytes one millicore processes per second; bridges V/R in the compute term.
  std::int64_t millicore_throughput = 1000;
  // Instructions one millicore retires per second; maps lambda*V to millicores.
  std::int64_t instructions_per_millicore = 1000;

  friend bool operator==(const TimingConfig&, const TimingConfig&) = default;
};

struct ExecutionEstimate {
  Millis compute_ms = 0;
  Millis device_transfer_ms = 0;
  Millis uplink_transfer_ms = 0;  // cloud placement only
  Millis image_transfer_ms = 0;   // edge placement only
  Millis total_ms = 0;

  friend bool operator==(const ExecutionEstimate&, const ExecutionEstimate&) = default;
};

/// ceil(lambda * V / instructions_per_millicore), at least one millicore.
Millicores required_cpu(const TaskSpec& task, const TimingConfig& cfg = {});

/// CPU demand the resource manager reserves: the declared request, raised to
/// the computed requirement when the latter is larger.
Millicores cpu_demand(const TaskSpec& task, const TimingConfig& cfg = {});

ExecutionEstimate edge_execution_time(const TaskSpec& task, const NodeSpec& node, Millicores allocated_cpu,
                                      const TimingConfig& cfg = {});

/// `edge_gateway` is the edge node relaying device data up to the cloud.
ExecutionEstimate cloud_execution_time(const TaskSpec& task, const NodeSpec& edge_gateway, Millicores allocated_cpu,
                                       const TimingConfig& cfg = {});

/// Dispatches on the host tier; `gateway` is only consulted for cloud hosts.
ExecutionEstimate execution_time(const TaskSpec& task, const NodeSpec& host, const NodeSpec& gateway,
                                 Millicores allocated_cpu, const TimingConfig& cfg = {});

inline bool meets_deadline(const ExecutionEstimate& est, const TaskSpec& task) { return est.total_ms <= task.deadline; }

/// Wall time a pod occupies its node: the nominal run time or the modelled
/// execution time, whichever is longer.
inline Millis pod_runtime(const TaskSpec& task, const ExecutionEstimate& est) {
  return task.duration > est.total_ms ? task.duration : est.total_ms;
}

}  // namespace kces
