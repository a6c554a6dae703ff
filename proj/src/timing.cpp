#include "kces/timing.hpp"

#include <algorithm>

#include "kces/error.hpp"

namespace kces {

namespace {

// Milliseconds to move `bytes` over a link of `bw` bytes/s, rounded up.
Millis transfer_ms(Bytes bytes, const Rational& bw) {
  if (bytes == 0) return 0;
  return ceil_div(static_cast<__int128>(bytes) * 1000 * bw.den, static_cast<__int128>(bw.num));
}

Millis compute_ms(Bytes bytes, Millicores cpu, const TimingConfig& cfg) {
  if (bytes == 0) return 0;
  return ceil_div(static_cast<__int128>(bytes) * 1000, static_cast<__int128>(cpu) * cfg.millicore_throughput);
}

void check_allocation(Millicores cpu, const TaskSpec& task) {
  if (cpu <= 0) throw Error(ErrorCode::ZeroAllocation, "task " + task.task_id + " allocated no cpu");
}

}  // namespace

Millicores required_cpu(const TaskSpec& task, const TimingConfig& cfg) {
  const auto& l = task.instructions_per_byte;
  const __int128 numer = static_cast<__int128>(l.num) * task.data_volume;
  const __int128 denom = static_cast<__int128>(l.den) * cfg.instructions_per_millicore;
  return std::max<Millicores>(1, ceil_div(numer, denom));
}

Millicores cpu_demand(const TaskSpec& task, const TimingConfig& cfg) {
  return std::max(task.cpu_request, required_cpu(task, cfg));
}

ExecutionEstimate edge_execution_time(const TaskSpec& task, const NodeSpec& node, Millicores allocated_cpu,
                                      const TimingConfig& cfg) {
  check_allocation(allocated_cpu, task);
  ExecutionEstimate est;
  est.compute_ms = compute_ms(task.data_volume, allocated_cpu, cfg);
  est.device_transfer_ms = transfer_ms(task.data_volume, node.device_bandwidth);
  est.image_transfer_ms = node.has_image(task.image_id) ? 0 : transfer_ms(task.image_size, node.uplink_bandwidth);
  est.total_ms = est.compute_ms + est.device_transfer_ms + est.image_transfer_ms;
  return est;
}

ExecutionEstimate cloud_execution_time(const TaskSpec& task, const NodeSpec& edge_gateway, Millicores allocated_cpu,
                                       const TimingConfig& cfg) {
  check_allocation(allocated_cpu, task);
  ExecutionEstimate est;
  est.compute_ms = compute_ms(task.data_volume, allocated_cpu, cfg);
  est.device_transfer_ms = transfer_ms(task.data_volume, edge_gateway.device_bandwidth);
  est.uplink_transfer_ms = transfer_ms(task.data_volume, edge_gateway.uplink_bandwidth);
  est.total_ms = est.compute_ms + est.device_transfer_ms + est.uplink_transfer_ms;
  return est;
}

ExecutionEstimate execution_time(const TaskSpec& task, const NodeSpec& host, const NodeSpec& gateway,
                                 Millicores allocated_cpu, const TimingConfig& cfg) {
  return host.tier == Tier::Edge ? edge_execution_time(task, host, allocated_cpu, cfg)
                                 : cloud_execution_time(task, gateway, allocated_cpu, cfg);
}

}  // namespace kces
