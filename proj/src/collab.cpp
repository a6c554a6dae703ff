#include "kces/collab.hpp"

#include <algorithm>

#include "kces/error.hpp"

namespace kces {

ClusterNodeLabelMap cluster_node_label_map(const Cluster& cluster) {
  ClusterNodeLabelMap out;
  for (const auto& n : cluster.nodes) out[n.label_key()].push_back(n.ip);
  for (auto& [key, ips] : out) std::sort(ips.begin(), ips.end());
  return out;
}

const std::string& NodeTaskImageMap::address(const std::string& ip, const std::string& image_id) const {
  auto node = entries.find(ip);
  if (node != entries.end()) {
    auto img = node->second.find(image_id);
    if (img != node->second.end()) return img->second;
  }
  throw Error(ErrorCode::NotFound, "no image address for " + image_id + " on " + ip);
}

std::string image_address_for(const NodeSpec& node, const std::string& image_id) {
  return node.tier == Tier::Cloud ? "registry.cloud/amd64/" + image_id : "registry.edge/arm64/" + image_id;
}

NodeTaskImageMap build_image_map(const Cluster& cluster, const std::set<std::string>& image_ids) {
  NodeTaskImageMap map;
  for (const auto& n : cluster.nodes)
    for (const auto& id : image_ids) map.entries[n.ip][id] = image_address_for(n, id);
  return map;
}

std::optional<OomEvent> detect_oom(const PodRecord& pod, const TaskSpec& task, MiB beta, Millis now_ms) {
  if (!pod.holds_resources()) return std::nullopt;
  if (pod.allocated.mem >= task.mem_min + beta) return std::nullopt;
  return OomEvent{pod.workflow_id, pod.task_id, task.image_id, pod.node_ip, now_ms, pod.allocated};
}

namespace {

void delete_failed_pod(const OomEvent& event, ClusterState& state) {
  for (auto& [key, pod] : state.pods) {
    if (pod.workflow_id != event.workflow_id || pod.task_id != event.task_id || pod.node_ip != event.node_ip) continue;
    if (pod.state == PodState::OOMKilled || pod.holds_resources()) pod.state = PodState::Deleted;
  }
}

bool has_headroom(const ResidualResourceMap& residuals, const std::string& ip) {
  auto it = residuals.find(ip);
  return it != residuals.end() && it->second.cpu > 0 && it->second.mem > 0;
}

}  // namespace

Label roam(const OomEvent& event, ClusterState& state, TaskStore& store) {
  delete_failed_pod(event, state);
  const auto label_map = cluster_node_label_map(state.cluster);
  const auto residuals = residual_resources(state);
  const auto rec = store.current(event.workflow_id, event.task_id);
  if (!rec) throw Error(ErrorCode::NotFound, "no record for " + event.workflow_id + "/" + event.task_id);

  std::vector<const NodeSpec*> candidates;
  if (auto it = label_map.find(rec->label.key); it != label_map.end()) {
    for (const auto& ip : it->second)
      if (ip != event.node_ip && has_headroom(residuals, ip)) candidates.push_back(&state.cluster.node(ip));
  }
  const auto* target = choose_node(candidates, residuals);
  if (!target)
    throw Error(ErrorCode::NoAlternativeNode,
                "no other node under label '" + rec->label.key + "' can host " + event.workflow_id + "/" + event.task_id);
  const Label label = target->label();
  store.update_label(event.workflow_id, event.task_id, label);
  return label;
}

Label offload(const OomEvent& event, ClusterState& state, TaskStore& store, const NodeTaskImageMap& images) {
  const auto& host = state.cluster.node(event.node_ip);
  if (host.tier != Tier::Edge)
    throw Error(ErrorCode::IllegalTransition, event.workflow_id + "/" + event.task_id + " is not on an edge node");
  delete_failed_pod(event, state);
  const auto residuals = residual_resources(state);
  const auto cloud_scene = state.cluster.paired_cloud_scene(host.scene);

  std::vector<const NodeSpec*> candidates;
  for (const auto& n : state.cluster.nodes)
    if (n.tier == Tier::Cloud && n.scene == cloud_scene && n.ip != event.node_ip && has_headroom(residuals, n.ip))
      candidates.push_back(&n);
  const auto* target = choose_node(candidates, residuals);
  if (!target)
    throw Error(ErrorCode::NoCloudCapacity,
                "cloud scene '" + cloud_scene + "' cannot host " + event.workflow_id + "/" + event.task_id);
  const Label label = target->label();
  store.update_label(event.workflow_id, event.task_id, label, images.address(target->ip, event.image_id));
  return label;
}

}  // namespace kces
