#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kces/engine.hpp"
#include "kces/model.hpp"
#include "kces/store.hpp"

namespace kces {

/// label key -> ips of the nodes carrying it.
using ClusterNodeLabelMap = std::map<std::string, std::vector<std::string>>;

ClusterNodeLabelMap cluster_node_label_map(const Cluster& cluster);

/// Per-node image addresses. Edge and cloud nodes run different processor
/// architectures, so a task's image address changes when it is offloaded.
struct NodeTaskImageMap {
  std::map<std::string, std::map<std::string, std::string>> entries;  // ip -> image id -> address

  const std::string& address(const std::string& ip, const std::string& image_id) const;
};

std::string image_address_for(const NodeSpec& node, const std::string& image_id);
NodeTaskImageMap build_image_map(const Cluster& cluster, const std::set<std::string>& image_ids);

struct OomEvent {
  std::string workflow_id;
  std::string task_id;
  std::string image_id;
  std::string node_ip;
  Millis time_ms = 0;
  Allocation allocated;
};

/// Fires when a live pod was granted less than mem_min + beta.
std::optional<OomEvent> detect_oom(const PodRecord& pod, const TaskSpec& task, MiB beta, Millis now_ms);

/// Horizontal roaming: deletes the failed pod, then relabels the task for the
/// node with the most residual resources among the other nodes sharing its
/// label key. Throws NoAlternativeNode.
Label roam(const OomEvent& event, ClusterState& state, TaskStore& store);

/// Vertical offloading: deletes the failed pod, then relabels the task for the
/// best cloud node of the cloud scene paired with its edge scene and switches
/// its image address. Throws NoCloudCapacity.
Label offload(const OomEvent& event, ClusterState& state, TaskStore& store, const NodeTaskImageMap& images);

}  // namespace kces
