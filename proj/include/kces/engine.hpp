#pragma once

#include <map>
#include <string>
#include <vector>

#include "kces/model.hpp"
#include "kces/store.hpp"
#include "kces/timing.hpp"

namespace kces {

struct EngineConfig {
  MiB beta = 20;          // headroom added to a task's minimum memory
  MiB mem_floor = 100;    // grants below this wait instead of being created
  Millicores cpu_min = 1; // minimum cpu a scaled grant may carry
  TimingConfig timing;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// ip -> remaining {milli_cpu, memory}.
using ResidualResourceMap = std::map<std::string, Resources>;

ResidualResourceMap residual_resources(const ClusterState& state);

/// Demand the manager reserves for a task: {cpu_demand, mem_request}.
Resources task_demand(const TaskSpec& task, const TimingConfig& timing = {});

/// Summed demand of not-alive tasks with the same label whose start falls in
/// the task's recorded lifecycle window, excluding the task itself.
Resources concurrent_demand(const std::string& workflow_id, const std::string& task_id, const Label& label,
                            const TaskStore& store);

/// Inputs and outcome of the acceptance test for one task on one node.
struct Assessment {
  Resources allocatable;
  Resources used;
  Resources request;
  Resources compete;
  bool cpu_fits = false;  // A1
  bool mem_fits = false;  // A2

  bool accepted() const { return cpu_fits && mem_fits; }
};

Assessment assess(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node, const TaskStore& store,
                  const ClusterState& state, const EngineConfig& cfg = {});

bool evaluate(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node, const TaskStore& store,
              const ClusterState& state, const EngineConfig& cfg = {});

/// Proportional cut of the request given the node headroom and the competing
/// demand, floored, clamped to [1, request]. Throws NonPositiveHeadroom when
/// allocatable - used <= 0 for either resource.
Resources scale_demand(const Resources& request, const Resources& allocatable, const Resources& used,
                       const Resources& compete);

enum class Branch { A1A2, NotA1A2, A1NotA2, NotA1NotA2 };
std::string to_string(Branch b);

struct AllocationResult {
  enum class Verdict { Granted, RoamRequest };

  Verdict verdict = Verdict::RoamRequest;
  Allocation allocation;  // empty when headroom is exhausted
  Branch branch = Branch::A1A2;
  bool headroom_exhausted = false;
  Assessment assessment;

  bool granted() const { return verdict == Verdict::Granted; }
};

/// Four-branch allocation. A grant below mem_min + beta (or cpu_min) comes
/// back as a RoamRequest carrying the undersized allocation.
AllocationResult allocate(const std::string& workflow_id, const TaskSpec& task, const NodeSpec& node,
                          const TaskStore& store, const ClusterState& state, const EngineConfig& cfg = {});

/// Nodes a task may be labelled for: its edge scene, or the cloud tier.
std::vector<const NodeSpec*> placement_candidates(const TaskSpec& task, const Cluster& cluster);

/// Max residual memory, then max residual cpu, then lowest ip.
const NodeSpec* choose_node(const std::vector<const NodeSpec*>& candidates, const ResidualResourceMap& residuals);

/// Chooses the task's node from `residuals` and writes the label to the
/// task's current store record. Throws NoNodeInScene.
Label place(const std::string& workflow_id, const TaskSpec& task, const Cluster& cluster,
            const ResidualResourceMap& residuals, TaskStore& store);

}  // namespace kces
