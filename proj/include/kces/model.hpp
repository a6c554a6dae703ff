#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "kces/rational.hpp"

namespace kces {

using Millicores = std::int64_t;
using MiB = std::int64_t;
using Millis = std::int64_t;
using Bytes = std::int64_t;

enum class Tier { Cloud, Edge };
enum class Role { CloudBound, EdgeBound };

struct Resources {
  Millicores cpu = 0;
  MiB mem = 0;

  friend bool operator==(const Resources&, const Resources&) = default;
};

/// Scheduling label carried by a node and by every task pod placed on it.
/// `key` is the node-role keyword (edge scene name for edge nodes, node id for
/// cloud nodes); `value` is the node ip.
struct Label {
  std::string key;
  std::string value;

  std::string str() const { return key + ":" + value; }
  friend auto operator<=>(const Label&, const Label&) = default;
};

struct NodeSpec {
  std::string node_id;
  std::string ip;
  Tier tier = Tier::Edge;
  std::string scene;
  Millicores cpu_capacity = 0;
  MiB mem_capacity = 0;
  Rational device_bandwidth;  // bytes/s, device -> edge
  Rational uplink_bandwidth;  // bytes/s, edge -> cloud
  std::set<std::string> image_cache;

  // Cloud nodes sit next to the image warehouse and hold every image.
  bool has_image(const std::string& image_id) const {
    return tier == Tier::Cloud || image_cache.count(image_id) > 0;
  }
  std::string label_key() const { return tier == Tier::Edge ? scene : node_id; }
  Label label() const { return {label_key(), ip}; }
  Resources capacity() const { return {cpu_capacity, mem_capacity}; }

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct TaskSpec {
  std::string task_id;
  std::set<std::string> parents;
  Bytes data_volume = 0;
  std::string image_id;
  Bytes image_size = 0;
  Rational instructions_per_byte{1};
  Millicores cpu_request = 0;
  MiB mem_request = 0;
  MiB mem_min = 0;
  Millis duration = 0;
  Millis deadline = 0;
  Role role = Role::EdgeBound;
  std::string scene_hint;
  // Fixed placement; used to replay recorded scenarios.
  std::optional<std::string> pinned_ip;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct WorkflowSpec {
  std::string workflow_id;
  Millis deadline = 0;
  std::vector<TaskSpec> tasks;

  const TaskSpec* find(const std::string& task_id) const;
  const TaskSpec& task(const std::string& task_id) const;

  friend bool operator==(const WorkflowSpec&, const WorkflowSpec&) = default;
};

/// A workflow together with the time it is injected.
struct WorkflowArrival {
  Millis arrival_ms = 0;
  WorkflowSpec workflow;

  friend bool operator==(const WorkflowArrival&, const WorkflowArrival&) = default;
};

using Workload = std::vector<WorkflowArrival>;

/// Static cluster description: load-bearing nodes plus the edge-scene to
/// cloud-scene pairing used for vertical offloading.
struct Cluster {
  std::vector<NodeSpec> nodes;
  std::map<std::string, std::string> cloud_scene_for;

  const NodeSpec* find(const std::string& ip) const;
  const NodeSpec& node(const std::string& ip) const;
  std::vector<const NodeSpec*> nodes_in_scene(const std::string& scene) const;
  std::vector<const NodeSpec*> nodes_of_tier(Tier tier) const;
  /// Cloud scene serving an edge scene; falls back to the only cloud scene.
  std::string paired_cloud_scene(const std::string& edge_scene) const;
  /// Edge node relaying device data for a scene (lowest ip in the scene, or
  /// in the whole edge tier when the scene is empty/unknown).
  const NodeSpec& gateway_for(const std::string& scene) const;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

enum class PodState { Pending, Running, Succeeded, OOMKilled, Deleted };

struct Allocation {
  Millicores cpu = 0;
  MiB mem = 0;
  std::string node_ip;
  bool scaled = false;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Runtime instance of one task incarnation.
struct PodRecord {
  std::string workflow_id;
  std::string task_id;
  int incarnation = 0;
  std::string node_ip;
  PodState state = PodState::Pending;
  Allocation allocated;
  Millis created_ms = 0;
  Millis started_ms = -1;
  Millis finished_ms = -1;

  /// Pending and Running pods hold their allocation; others hold nothing.
  bool holds_resources() const { return state == PodState::Pending || state == PodState::Running; }
};

using PodKey = std::tuple<std::string, std::string, int>;

/// Live view of the cluster: static nodes plus every pod ever created.
struct ClusterState {
  Cluster cluster;
  std::map<PodKey, PodRecord> pods;

  Resources used_on(const std::string& ip) const;
  PodRecord& pod(const PodKey& key);
  const PodRecord& pod(const PodKey& key) const;
};

/// Throws Error{ParseError} naming the offending node when the cluster is
/// empty or a node breaks its invariants.
void validate_cluster(const Cluster& cluster);

/// Returns `wf` unchanged when it is a valid DAG; throws Error otherwise.
const WorkflowSpec& validate_workflow(const WorkflowSpec& wf);

/// Tasks in a deterministic topological order (Kahn, ties by declaration order).
std::vector<std::string> topological_order(const WorkflowSpec& wf);

/// Not-completed tasks whose parents are all in `completed`.
std::set<std::string> ready_tasks(const WorkflowSpec& wf, const std::set<std::string>& completed);

std::string to_string(Tier tier);
std::string to_string(PodState state);
std::string to_string(Role role);
Tier parse_tier(const std::string& s);
Role parse_role(const std::string& s);

}  // namespace kces
