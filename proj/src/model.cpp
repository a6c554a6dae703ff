#include "kces/model.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "kces/error.hpp"

namespace kces {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingParent: return "DanglingParent";
    case ErrorCode::DeadlineMismatch: return "DeadlineMismatch";
    case ErrorCode::DuplicateTask: return "DuplicateTask";
    case ErrorCode::InvalidTask: return "InvalidTask";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::MultipleSinks: return "MultipleSinks";
    case ErrorCode::ZeroAllocation: return "ZeroAllocation";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NonPositiveHeadroom: return "NonPositiveHeadroom";
    case ErrorCode::NoNodeInScene: return "NoNodeInScene";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NoAlternativeNode: return "NoAlternativeNode";
    case ErrorCode::NoCloudCapacity: return "NoCloudCapacity";
    case ErrorCode::IndivisibleTotal: return "IndivisibleTotal";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::Nonterminating: return "Nonterminating";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::IncompleteTrace: return "IncompleteTrace";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const TaskSpec* WorkflowSpec::find(const std::string& task_id) const {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return t.task_id == task_id; });
  return it == tasks.end() ? nullptr : &*it;
}

const TaskSpec& WorkflowSpec::task(const std::string& task_id) const {
  if (const auto* t = find(task_id)) return *t;
  throw Error(ErrorCode::NotFound, "task " + task_id + " not in workflow " + workflow_id);
}

const NodeSpec* Cluster::find(const std::string& ip) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const NodeSpec& n) { return n.ip == ip; });
  return it == nodes.end() ? nullptr : &*it;
}

const NodeSpec& Cluster::node(const std::string& ip) const {
  if (const auto* n = find(ip)) return *n;
  throw Error(ErrorCode::UnknownNode, "no node with ip " + ip);
}

std::vector<const NodeSpec*> Cluster::nodes_in_scene(const std::string& scene) const {
  std::vector<const NodeSpec*> out;
  for (const auto& n : nodes)
    if (n.scene == scene) out.push_back(&n);
  return out;
}

std::vector<const NodeSpec*> Cluster::nodes_of_tier(Tier tier) const {
  std::vector<const NodeSpec*> out;
  for (const auto& n : nodes)
    if (n.tier == tier) out.push_back(&n);
  return out;
}

std::string Cluster::paired_cloud_scene(const std::string& edge_scene) const {
  if (auto it = cloud_scene_for.find(edge_scene); it != cloud_scene_for.end()) return it->second;
  for (const auto& n : nodes)
    if (n.tier == Tier::Cloud) return n.scene;
  return {};
}

const NodeSpec& Cluster::gateway_for(const std::string& scene) const {
  const NodeSpec* best = nullptr;
  for (const auto& n : nodes) {
    if (n.tier != Tier::Edge || n.scene != scene) continue;
    if (!best || n.ip < best->ip) best = &n;
  }
  if (!best) {
    for (const auto& n : nodes) {
      if (n.tier != Tier::Edge) continue;
      if (!best || n.ip < best->ip) best = &n;
    }
  }
  if (!best) throw Error(ErrorCode::NoNodeInScene, "cluster has no edge gateway for scene '" + scene + "'");
  return *best;
}

Resources ClusterState::used_on(const std::string& ip) const {
  Resources used;
  for (const auto& [key, p] : pods) {
    if (p.node_ip != ip || !p.holds_resources()) continue;
    used.cpu += p.allocated.cpu;
    used.mem += p.allocated.mem;
  }
  return used;
}

PodRecord& ClusterState::pod(const PodKey& key) {
  auto it = pods.find(key);
  if (it == pods.end())
    throw Error(ErrorCode::NotFound, "no pod " + std::get<0>(key) + "/" + std::get<1>(key) + "#" +
                                         std::to_string(std::get<2>(key)));
  return it->second;
}

const PodRecord& ClusterState::pod(const PodKey& key) const { return const_cast<ClusterState*>(this)->pod(key); }

void validate_cluster(const Cluster& cluster) {
  if (cluster.nodes.empty()) throw Error(ErrorCode::ParseError, "cluster has no nodes");
  std::set<std::string> ips, ids;
  for (const auto& n : cluster.nodes) {
    const std::string where = "node " + n.node_id + " (" + n.ip + ")";
    if (n.ip.empty() || !ips.insert(n.ip).second) throw Error(ErrorCode::ParseError, where + ": missing or duplicate ip");
    if (n.node_id.empty() || !ids.insert(n.node_id).second)
      throw Error(ErrorCode::ParseError, where + ": missing or duplicate id");
    if (n.cpu_capacity <= 0 || n.mem_capacity <= 0) throw Error(ErrorCode::ParseError, where + ": capacity must be > 0");
    if (!n.device_bandwidth.is_positive() || !n.uplink_bandwidth.is_positive())
      throw Error(ErrorCode::ParseError, where + ": bandwidth must be > 0");
    if (n.scene.empty()) throw Error(ErrorCode::ParseError, where + ": missing scene");
  }
}

std::vector<std::string> topological_order(const WorkflowSpec& wf) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& t : wf.tasks) indegree[t.task_id] = static_cast<int>(t.parents.size());
  for (const auto& t : wf.tasks)
    for (const auto& p : t.parents) children[p].push_back(t.task_id);

  std::vector<std::string> order;
  std::deque<std::string> frontier;
  for (const auto& t : wf.tasks)
    if (indegree[t.task_id] == 0) frontier.push_back(t.task_id);
  while (!frontier.empty()) {
    auto id = frontier.front();
    frontier.pop_front();
    order.push_back(id);
    for (const auto& c : children[id])
      if (--indegree[c] == 0) frontier.push_back(c);
  }
  if (order.size() != wf.tasks.size())
    throw Error(ErrorCode::CycleDetected, "workflow " + wf.workflow_id + " contains a cycle");
  return order;
}

const WorkflowSpec& validate_workflow(const WorkflowSpec& wf) {
  const std::string where = "workflow " + wf.workflow_id;
  if (wf.tasks.empty()) throw Error(ErrorCode::InvalidTask, where + " has no tasks");
  if (wf.deadline <= 0) throw Error(ErrorCode::InvalidTask, where + " deadline must be > 0");

  std::set<std::string> ids;
  for (const auto& t : wf.tasks) {
    if (!ids.insert(t.task_id).second) throw Error(ErrorCode::DuplicateTask, where + " repeats task " + t.task_id);
    const std::string tw = where + " task " + t.task_id;
    if (t.duration <= 0) throw Error(ErrorCode::InvalidTask, tw + ": duration must be > 0");
    if (t.deadline <= 0) throw Error(ErrorCode::InvalidTask, tw + ": deadline must be > 0");
    if (t.cpu_request < 1 || t.mem_request < 1) throw Error(ErrorCode::InvalidTask, tw + ": requests must be >= 1");
    if (t.mem_min < 0 || t.mem_min > t.mem_request) throw Error(ErrorCode::InvalidTask, tw + ": need 0 <= mem_min <= mem_request");
    if (t.data_volume < 0 || t.image_size < 0) throw Error(ErrorCode::InvalidTask, tw + ": negative volume");
    if (t.instructions_per_byte.num < 0) throw Error(ErrorCode::InvalidTask, tw + ": negative lambda");
    if (t.role == Role::EdgeBound && t.scene_hint.empty())
      throw Error(ErrorCode::InvalidTask, tw + ": edge-bound task needs a scene");
  }
  for (const auto& t : wf.tasks)
    for (const auto& p : t.parents)
      if (!ids.count(p)) throw Error(ErrorCode::DanglingParent, where + " task " + t.task_id + " references unknown parent " + p);

  topological_order(wf);  // throws CycleDetected

  // Weak connectivity via union-find over parent edges.
  std::map<std::string, std::string> root;
  for (const auto& id : ids) root[id] = id;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
    if (root[x] == x) return x;
    return root[x] = find(root[x]);
  };
  for (const auto& t : wf.tasks)
    for (const auto& p : t.parents) root[find(t.task_id)] = find(p);
  std::set<std::string> components;
  for (const auto& id : ids) components.insert(find(id));
  if (components.size() != 1) throw Error(ErrorCode::Disconnected, where + " is not weakly connected");

  std::set<std::string> has_child;
  for (const auto& t : wf.tasks) has_child.insert(t.parents.begin(), t.parents.end());
  std::vector<const TaskSpec*> sinks;
  for (const auto& t : wf.tasks)
    if (!has_child.count(t.task_id)) sinks.push_back(&t);
  if (sinks.size() != 1) throw Error(ErrorCode::MultipleSinks, where + " must have exactly one sink task");
  if (sinks.front()->deadline != wf.deadline)
    throw Error(ErrorCode::DeadlineMismatch, where + " sink " + sinks.front()->task_id + " deadline " +
                                                 std::to_string(sinks.front()->deadline) + " != workflow deadline " +
                                                 std::to_string(wf.deadline));
  return wf;
}

std::set<std::string> ready_tasks(const WorkflowSpec& wf, const std::set<std::string>& completed) {
  std::set<std::string> out;
  for (const auto& t : wf.tasks) {
    if (completed.count(t.task_id)) continue;
    if (std::all_of(t.parents.begin(), t.parents.end(), [&](const std::string& p) { return completed.count(p) > 0; }))
      out.insert(t.task_id);
  }
  return out;
}

std::string to_string(Tier tier) { return tier == Tier::Cloud ? "cloud" : "edge"; }
std::string to_string(PodState state) {
  switch (state) {
    case PodState::Pending: return "Pending";
    case PodState::Running: return "Running";
    case PodState::Succeeded: return "Succeeded";
    case PodState::OOMKilled: return "OOMKilled";
    case PodState::Deleted: return "Deleted";
  }
  return "Unknown";
}

std::string to_string(Role role) { return role == Role::CloudBound ? "cloud" : "edge"; }

Tier parse_tier(const std::string& s) {
  if (s == "cloud") return Tier::Cloud;
  if (s == "edge") return Tier::Edge;
  throw Error(ErrorCode::ParseError, "unknown tier '" + s + "'");
}

Role parse_role(const std::string& s) {
  if (s == "cloud") return Role::CloudBound;
  if (s == "edge") return Role::EdgeBound;
  throw Error(ErrorCode::ParseError, "unknown role '" + s + "'");
}

}  // namespace kces
