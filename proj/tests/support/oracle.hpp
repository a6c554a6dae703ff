#pragma once

// Independent exact-arithmetic reference implementations used by the unit and
// acceptance tests. They work on boost rationals instead of the library's
// integer ceil/floor helpers, so agreement is a genuine cross-check.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <string>

#include "kces/model.hpp"
#include "kces/store.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_rational q(const kces::Rational& r) { return cpp_rational(cpp_int(r.num), cpp_int(r.den)); }

inline std::int64_t ceil_q(const cpp_rational& x) {
  cpp_int n = boost::multiprecision::numerator(x);
  cpp_int d = boost::multiprecision::denominator(x);
  cpp_int f = n / d;  // truncates toward zero
  if (f * d != n && n > 0) f += 1;
  return static_cast<std::int64_t>(f);
}

inline std::int64_t floor_q(const cpp_rational& x) {
  cpp_int n = boost::multiprecision::numerator(x);
  cpp_int d = boost::multiprecision::denominator(x);
  cpp_int f = n / d;
  if (f * d != n && n < 0) f -= 1;
  return static_cast<std::int64_t>(f);
}

struct Estimate {
  std::int64_t compute = 0, device = 0, uplink = 0, image = 0, total = 0;
};

// Seconds as exact rationals, converted to milliseconds and rounded up once
// per term.
inline std::int64_t ms_over_link(std::int64_t bytes, const kces::Rational& bw) {
  return ceil_q(cpp_rational(bytes) / q(bw) * 1000);
}

inline std::int64_t compute_ms(std::int64_t bytes, std::int64_t millicores, std::int64_t throughput) {
  return ceil_q(cpp_rational(bytes) / (cpp_rational(millicores) * throughput) * 1000);
}

inline Estimate edge(const kces::TaskSpec& t, const kces::NodeSpec& n, std::int64_t cpu, std::int64_t throughput) {
  Estimate e;
  e.compute = compute_ms(t.data_volume, cpu, throughput);
  e.device = ms_over_link(t.data_volume, n.device_bandwidth);
  const bool cached = n.tier == kces::Tier::Cloud || n.image_cache.count(t.image_id) > 0;
  e.image = cached ? 0 : ms_over_link(t.image_size, n.uplink_bandwidth);
  e.total = e.compute + e.device + e.image;
  return e;
}

inline Estimate cloud(const kces::TaskSpec& t, const kces::NodeSpec& gw, std::int64_t cpu, std::int64_t throughput) {
  Estimate e;
  e.compute = compute_ms(t.data_volume, cpu, throughput);
  e.device = ms_over_link(t.data_volume, gw.device_bandwidth);
  e.uplink = ms_over_link(t.data_volume, gw.uplink_bandwidth);
  e.total = e.compute + e.device + e.uplink;
  return e;
}

inline std::int64_t required_cpu(const kces::TaskSpec& t, std::int64_t per_millicore) {
  const auto v = ceil_q(q(t.instructions_per_byte) * t.data_volume / per_millicore);
  return v < 1 ? 1 : v;
}

// Eq-style proportional cut: floor(request * headroom / (request + compete)),
// clamped into [1, request].
inline std::int64_t cut(std::int64_t request, std::int64_t alloc, std::int64_t used, std::int64_t compete) {
  const auto v = floor_q(cpp_rational(request) * (alloc - used) / (request + compete));
  if (v < 1) return 1;
  return v > request ? request : v;
}

inline kces::Resources concurrent(const std::string& wf, const std::string& task, const kces::Label& label,
                                  const std::vector<kces::TaskRecord>& records) {
  const kces::TaskRecord* self = nullptr;
  for (const auto& r : records)
    if (r.workflow_id == wf && r.task_id == task && (!self || r.incarnation > self->incarnation)) self = &r;
  kces::Resources sum;
  for (const auto& r : records) {
    if (r.workflow_id == wf && r.task_id == task) continue;
    if (r.alive) continue;
    if (r.label.key != label.key || r.label.value != label.value) continue;
    if (r.start_ms < self->start_ms || r.start_ms > self->lifecycle_end_ms) continue;
    sum.cpu += r.request.cpu;
    sum.mem += r.request.mem;
  }
  return sum;
}

inline std::map<std::string, kces::Resources> residual(const kces::ClusterState& s) {
  std::map<std::string, kces::Resources> out;
  for (const auto& n : s.cluster.nodes) {
    kces::Resources r{n.cpu_capacity, n.mem_capacity};
    for (const auto& [k, p] : s.pods) {
      if (p.node_ip != n.ip) continue;
      if (p.state != kces::PodState::Pending && p.state != kces::PodState::Running) continue;
      r.cpu -= p.allocated.cpu;
      r.mem -= p.allocated.mem;
    }
    out[n.ip] = r;
  }
  return out;
}

}  // namespace oracle
