#pragma once

// Small constructors shared by the unit tests.

#include <set>
#include <string>

#include "kces/model.hpp"
#include "kces/store.hpp"

namespace fixture {

inline kces::NodeSpec edge(const std::string& id, const std::string& ip, const std::string& scene,
                           kces::Millicores cpu = 4000, kces::MiB mem = 2048) {
  kces::NodeSpec n;
  n.node_id = id;
  n.ip = ip;
  n.tier = kces::Tier::Edge;
  n.scene = scene;
  n.cpu_capacity = cpu;
  n.mem_capacity = mem;
  n.device_bandwidth = kces::Rational(12'500'000);
  n.uplink_bandwidth = kces::Rational(12'500'000);
  return n;
}

inline kces::NodeSpec cloud(const std::string& id, const std::string& ip, kces::Millicores cpu = 1000,
                            kces::MiB mem = 2048) {
  auto n = edge(id, ip, "cloud", cpu, mem);
  n.tier = kces::Tier::Cloud;
  return n;
}

inline kces::TaskSpec task(const std::string& id, std::set<std::string> parents = {}, kces::Millicores cpu = 100,
                           kces::MiB mem = 100, kces::MiB mem_min = 50, kces::Millis duration = 1000,
                           kces::Millis deadline = 100'000) {
  kces::TaskSpec t;
  t.task_id = id;
  t.parents = std::move(parents);
  t.data_volume = 1000;
  t.image_id = "img";
  t.image_size = 1000;
  t.instructions_per_byte = kces::Rational(1, 100);
  t.cpu_request = cpu;
  t.mem_request = mem;
  t.mem_min = mem_min;
  t.duration = duration;
  t.deadline = deadline;
  t.role = kces::Role::EdgeBound;
  t.scene_hint = "edge-1";
  return t;
}

inline kces::WorkflowSpec workflow(const std::string& id, std::vector<kces::TaskSpec> tasks) {
  kces::WorkflowSpec wf;
  wf.workflow_id = id;
  wf.tasks = std::move(tasks);
  wf.deadline = wf.tasks.empty() ? 1 : wf.tasks.back().deadline;
  return wf;
}

inline kces::TaskRecord record(const std::string& wf, const std::string& task, const kces::Label& label,
                               kces::Millis start, kces::Millis end, kces::Resources request, bool alive = false) {
  kces::TaskRecord r;
  r.workflow_id = wf;
  r.task_id = task;
  r.label = label;
  r.alive = alive;
  r.start_ms = start;
  r.lifecycle_end_ms = end;
  r.request = request;
  return r;
}

inline kces::PodRecord pod(const std::string& wf, const std::string& task, const std::string& ip,
                           kces::PodState state, kces::Millicores cpu, kces::MiB mem, int inc = 0) {
  kces::PodRecord p;
  p.workflow_id = wf;
  p.task_id = task;
  p.incarnation = inc;
  p.node_ip = ip;
  p.state = state;
  p.allocated = {cpu, mem, ip, false};
  return p;
}

inline void add(kces::ClusterState& s, const kces::PodRecord& p) { s.pods[{p.workflow_id, p.task_id, p.incarnation}] = p; }

}  // namespace fixture
