#include "kces/injector.hpp"

#include <algorithm>
#include <random>

#include "kces/error.hpp"

namespace kces {

namespace {

ArrivalSchedule from_sizes(const std::vector<int>& sizes, Millis interval_ms) {
  ArrivalSchedule s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    s.bursts.push_back({static_cast<Millis>(i) * interval_ms, sizes[i]});
    s.total += sizes[i];
  }
  return s;
}

void check_common(int total, Millis interval_ms) {
  if (total < 1) throw Error(ErrorCode::InvalidSchedule, "total must be >= 1");
  if (interval_ms < 1) throw Error(ErrorCode::InvalidSchedule, "interval must be >= 1 ms");
}

// Appends min(size, remaining) and returns whether the total was reached.
bool take(std::vector<int>& sizes, int& remaining, int size) {
  const int n = std::min(size, remaining);
  sizes.push_back(n);
  remaining -= n;
  return remaining == 0;
}

}  // namespace

ArrivalSchedule constant_schedule(int batch, int total, Millis interval_ms) {
  check_common(total, interval_ms);
  if (batch < 1) throw Error(ErrorCode::InvalidSchedule, "batch must be >= 1");
  if (total % batch != 0)
    throw Error(ErrorCode::IndivisibleTotal,
                "total " + std::to_string(total) + " is not a multiple of batch " + std::to_string(batch));
  return from_sizes(std::vector<int>(static_cast<std::size_t>(total / batch), batch), interval_ms);
}

ArrivalSchedule linear_schedule(int k, int d, int total, Millis interval_ms) {
  check_common(total, interval_ms);
  if (k < 1 || d < 1) throw Error(ErrorCode::InvalidSchedule, "linear pattern needs k >= 1 and d >= 1");
  std::vector<int> sizes;
  int remaining = total;
  for (int size = d; !take(sizes, remaining, size); size += k) {
  }
  return from_sizes(sizes, interval_ms);
}

ArrivalSchedule pyramid_schedule(int peak, int total, Millis interval_ms) {
  check_common(total, interval_ms);
  if (peak < 2) throw Error(ErrorCode::InvalidSchedule, "pyramid peak must be >= 2");
  std::vector<int> sizes;
  int remaining = total;
  int size = 1;
  int step = 1;
  while (!take(sizes, remaining, size)) {
    if (size == peak) step = -1;
    if (size == 1) step = 1;
    size += step;
  }
  return from_sizes(sizes, interval_ms);
}

IotWorkflowParams IotWorkflowParams::defaults() {
  IotWorkflowParams p;
  p.cloud = TaskProfile{5'000'000, Rational(1, 10), 500, 400, 200, 10'000, 60'000, "iot/decision", 200'000'000};
  p.collect = TaskProfile{80'000'000, Rational(1, 100), 1000, 1100, 150, 60'000, 600'000, "iot/collect", 50'000'000};
  p.process = TaskProfile{80'000'000, Rational(1, 100), 1000, 1100, 150, 60'000, 600'000, "iot/process", 50'000'000};
  return p;
}

namespace {

TaskSpec make_task(int index, const TaskProfile& prof, Role role, std::string scene, std::mt19937_64& rng,
                   int jitter_pct) {
  TaskSpec t;
  t.task_id = "T" + std::to_string(index);
  t.data_volume = prof.data_volume;
  if (jitter_pct > 0 && prof.data_volume > 0) {
    const auto span = static_cast<std::uint64_t>(2 * jitter_pct + 1);
    const auto offset = static_cast<std::int64_t>(rng() % span) - jitter_pct;
    t.data_volume = prof.data_volume * (100 + offset) / 100;
  }
  t.instructions_per_byte = prof.instructions_per_byte;
  t.image_id = prof.image_id;
  t.image_size = prof.image_size;
  t.cpu_request = prof.cpu;
  t.mem_request = prof.mem;
  t.mem_min = prof.mem_min;
  t.duration = prof.duration;
  t.deadline = prof.deadline;
  t.role = role;
  t.scene_hint = std::move(scene);
  return t;
}

}  // namespace

WorkflowSpec build_iot_workflow(const std::string& workflow_id, const IotWorkflowParams& params, std::uint64_t seed) {
  for (int n : params.edge_layers)
    if (n < 1) throw Error(ErrorCode::InvalidTask, "every edge layer needs at least one task");
  if (params.scenes.empty()) throw Error(ErrorCode::InvalidTask, "no edge scenes");

  std::mt19937_64 rng(seed);
  WorkflowSpec wf;
  wf.workflow_id = workflow_id;
  int next = 0;
  const auto scene_count = params.scenes.size();

  auto add_cloud = [&](std::set<std::string> parents) {
    auto t = make_task(next++, params.cloud, Role::CloudBound, "", rng, params.data_jitter_pct);
    t.parents = std::move(parents);
    wf.tasks.push_back(std::move(t));
    return wf.tasks.back().task_id;
  };

  // Collection tasks fan out from the preceding cloud task; processing tasks
  // join the collection tasks of their own scene round-robin.
  auto add_edge_stage = [&](const std::string& upstream, int n_collect, int n_process) {
    std::vector<std::pair<std::string, std::string>> collect;  // id, scene
    for (int k = 0; k < n_collect; ++k) {
      const auto& scene = params.scenes[static_cast<std::size_t>(k / 2) % scene_count];
      auto t = make_task(next++, params.collect, Role::EdgeBound, scene, rng, params.data_jitter_pct);
      t.parents = {upstream};
      collect.emplace_back(t.task_id, scene);
      wf.tasks.push_back(std::move(t));
    }
    std::vector<std::size_t> process_idx;
    for (int k = 0; k < n_process; ++k) {
      const auto& scene = params.scenes[static_cast<std::size_t>(k) % scene_count];
      wf.tasks.push_back(make_task(next++, params.process, Role::EdgeBound, scene, rng, params.data_jitter_pct));
      process_idx.push_back(wf.tasks.size() - 1);
    }
    std::set<std::string> fed;
    for (const auto& scene : params.scenes) {
      std::vector<std::size_t> procs;
      for (auto i : process_idx)
        if (wf.tasks[i].scene_hint == scene) procs.push_back(i);
      if (procs.empty()) continue;
      std::size_t rr = 0;
      for (const auto& [id, s] : collect) {
        if (s != scene) continue;
        wf.tasks[procs[rr++ % procs.size()]].parents.insert(id);
        fed.insert(id);
      }
    }
    for (auto i : process_idx) {
      auto& t = wf.tasks[i];
      if (!t.parents.empty()) continue;
      for (const auto& [id, s] : collect)
        if (s == t.scene_hint) t.parents.insert(id);
      if (t.parents.empty())
        for (const auto& [id, s] : collect) t.parents.insert(id);
      fed.insert(t.parents.begin(), t.parents.end());
    }
    std::set<std::string> sinks;
    for (auto i : process_idx) sinks.insert(wf.tasks[i].task_id);
    for (const auto& [id, s] : collect)
      if (!fed.count(id)) sinks.insert(id);
    return sinks;
  };

  const auto root = add_cloud({});
  const auto mid = add_cloud(add_edge_stage(root, params.edge_layers[0], params.edge_layers[1]));
  add_cloud(add_edge_stage(mid, params.edge_layers[2], params.edge_layers[3]));
  wf.deadline = wf.tasks.back().deadline;
  return wf;
}

Workload make_workload(const ArrivalSchedule& schedule, const IotWorkflowParams& params, std::uint64_t seed) {
  Workload out;
  int index = 0;
  for (const auto& burst : schedule.bursts) {
    for (int i = 0; i < burst.count; ++i, ++index) {
      const auto wf_seed = seed * 1'000'003ULL + static_cast<std::uint64_t>(index);
      out.push_back({burst.time_ms, build_iot_workflow("wf-" + std::to_string(index), params, wf_seed)});
    }
  }
  return out;
}

}  // namespace kces
