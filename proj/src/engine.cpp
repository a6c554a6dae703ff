#include "kces/engine.hpp"

#include <algorithm>

#include "kces/error.hpp"

namespace kces {

ResidualResourceMap residual_resources(const ClusterState& state) {
  ResidualResourceMap out;
  for (const auto& n : state.cluster.nodes) out[n.ip] = n.capacity();
  for (const auto& [key, pod] : state.pods) {
    if (!pod.holds_resources()) continue;
    auto it = out.find(pod.node_ip);
    if (it == out.end()) continue;
    it->second.cpu -= pod.allocated.cpu;
    it->second.mem -= pod.allocated.mem;
  }
  return out;
}

Resources task_demand(const TaskSpec& task, const TimingConfig& timing) {
  return {cpu_demand(task, timing), task.mem_request};
}

Resources concurrent_demand(const std::string& workflow_id, const std::string& task_id, const Label& label,
                            const TaskStore& store) {
  const auto self = store.current(workflow_id, task_id);
  if (!self) throw Error(ErrorCode::NotFound, "no record for " + workflow_id + "/" + task_id);
  Resources sum;
  for (const auto& rec : store.pending_on_node(label, self->start_ms, self->lifecycle_end_ms)) {
    if (rec.workflow_id == workflow_id && rec.task_id == task_id) continue;
    sum.cpu += rec.request.cpu;
    sum.mem += rec.request.mem;
  }
  return sum;
}

Assessment assess(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node, const TaskStore& store,
                  const ClusterState& state, const EngineConfig& cfg) {
  if (!state.cluster.find(node.ip)) throw Error(ErrorCode::UnknownNode, "node " + node.ip + " is not in the cluster");
  Assessment a;
  a.allocatable = node.capacity();
  a.used = state.used_on(node.ip);
  a.request = task_demand(task, cfg.timing);
  a.compete = concurrent_demand(workflow_id, task.task_id, node.label(), store);
  a.cpu_fits = a.allocatable.cpu >= a.request.cpu + a.used.cpu + a.compete.cpu;
  a.mem_fits = a.allocatable.mem >= a.request.mem + a.used.mem + a.compete.mem;
  return a;
}

bool evaluate(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node, const TaskStore& store,
              const ClusterState& state, const EngineConfig& cfg) {
  return assess(workflow_id, task, node, store, state, cfg).accepted();
}

namespace {

std::int64_t scaled(std::int64_t request, std::int64_t headroom, std::int64_t compete) {
  const auto cut = static_cast<std::int64_t>(static_cast<__int128>(request) * headroom / (request + compete));
  return std::clamp<std::int64_t>(cut, 1, request);
}

}  // namespace

Resources scale_demand(const Resources& request, const Resources& allocatable, const Resources& used,
                       const Resources& compete) {
  const Resources headroom{allocatable.cpu - used.cpu, allocatable.mem - used.mem};
  if (headroom.cpu <= 0 || headroom.mem <= 0)
    throw Error(ErrorCode::NonPositiveHeadroom, "node has no headroom (cpu " + std::to_string(headroom.cpu) +
                                                    "m, mem " + std::to_string(headroom.mem) + "Mi)");
  return {scaled(request.cpu, headroom.cpu, compete.cpu), scaled(request.mem, headroom.mem, compete.mem)};
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::A1A2: return "A1A2";
    case Branch::NotA1A2: return "~A1A2";
    case Branch::A1NotA2: return "A1~A2";
    case Branch::NotA1NotA2: return "~A1~A2";
  }
  return "?";
}

AllocationResult allocate(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node,
                          const TaskStore& store, const ClusterState& state, const EngineConfig& cfg) {
  AllocationResult r;
  r.assessment = assess(workflow_id, task, node, store, state, cfg);
  const auto& a = r.assessment;
  r.allocation.node_ip = node.ip;

  if (a.accepted()) {
    r.branch = Branch::A1A2;
    r.allocation.cpu = a.request.cpu;
    r.allocation.mem = a.request.mem;
  } else {
    r.branch = a.mem_fits ? Branch::NotA1A2 : (a.cpu_fits ? Branch::A1NotA2 : Branch::NotA1NotA2);
    Resources cut;
    try {
      cut = scale_demand(a.request, a.allocatable, a.used, a.compete);
    } catch (const Error&) {
      r.verdict = AllocationResult::Verdict::RoamRequest;
      r.headroom_exhausted = true;
      r.allocation.cpu = 0;
      r.allocation.mem = 0;
      return r;
    }
    r.allocation.cpu = a.cpu_fits ? a.request.cpu : cut.cpu;
    r.allocation.mem = a.mem_fits ? a.request.mem : cut.mem;
    r.allocation.scaled = true;
  }

  const bool fits_minimum = r.allocation.cpu >= cfg.cpu_min && r.allocation.mem >= task.mem_min + cfg.beta;
  r.verdict = fits_minimum ? AllocationResult::Verdict::Granted : AllocationResult::Verdict::RoamRequest;
  return r;
}

std::vector<const NodeSpec*> placement_candidates(const TaskSpec& task, const Cluster& cluster) {
  std::vector<const NodeSpec*> out;
  for (const auto& n : cluster.nodes) {
    const bool eligible = task.role == Role::CloudBound ? n.tier == Tier::Cloud
                                                        : (n.tier == Tier::Edge && n.scene == task.scene_hint);
    if (!eligible) continue;
    if (task.pinned_ip && n.ip != *task.pinned_ip) continue;
    out.push_back(&n);
  }
  return out;
}

const NodeSpec* choose_node(const std::vector<const NodeSpec*>& candidates, const ResidualResourceMap& residuals) {
  const NodeSpec* best = nullptr;
  Resources best_r;
  for (const auto* n : candidates) {
    auto it = residuals.find(n->ip);
    const Resources r = it == residuals.end() ? Resources{} : it->second;
    const bool better = !best || r.mem > best_r.mem || (r.mem == best_r.mem && r.cpu > best_r.cpu) ||
                        (r.mem == best_r.mem && r.cpu == best_r.cpu && n->ip < best->ip);
    if (better) {
      best = n;
      best_r = r;
    }
  }
  return best;
}

Label place(const std::string& workflow_id, const TaskSpec& task, const Cluster& cluster,
            const ResidualResourceMap& residuals, TaskStore& store) {
  const auto* node = choose_node(placement_candidates(task, cluster), residuals);
  if (!node) {
    const std::string where = task.role == Role::CloudBound ? std::string("cloud tier") : "scene " + task.scene_hint;
    throw Error(ErrorCode::NoNodeInScene, "no eligible node in " + where + " for " + workflow_id + "/" + task.task_id);
  }
  const Label label = node->label();
  if (store.current(workflow_id, task.task_id)) store.update_label(workflow_id, task.task_id, label);
  return label;
}

}  // namespace kces
