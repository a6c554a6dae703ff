#include "kces/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "kces/error.hpp"
#include "kces/timing.hpp"

namespace kces {

using nlohmann::ordered_json;

std::string to_string(Strategy s) { return s == Strategy::KCES ? "kces" : "fcfs"; }

std::string to_string(Recovery r) {
  switch (r) {
    case Recovery::None: return "none";
    case Recovery::Roam: return "roam";
    case Recovery::Offload: return "offload";
    case Recovery::RoamThenOffload: return "roam-offload";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "kces") return Strategy::KCES;
  if (s == "fcfs") return Strategy::FCFS;
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + s + "' (expected kces or fcfs)");
}

Recovery parse_recovery(const std::string& s) {
  if (s == "none") return Recovery::None;
  if (s == "roam") return Recovery::Roam;
  if (s == "offload") return Recovery::Offload;
  if (s == "roam-offload") return Recovery::RoamThenOffload;
  throw Error(ErrorCode::ConfigError, "unknown recovery '" + s + "' (expected roam, offload, roam-offload or none)");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::OomDetected: return "OomDetected";
    case EventKind::PodDeleted: return "PodDeleted";
    case EventKind::PodFinish: return "PodFinish";
    case EventKind::TaskReady: return "TaskReady";
    case EventKind::WorkflowArrival: return "WorkflowArrival";
    case EventKind::AllocationGranted: return "AllocationGranted";
    case EventKind::PodStart: return "PodStart";
    case EventKind::TaskRequeue: return "TaskRequeue";
  }
  return "?";
}

std::string Trace::to_ndjson() const {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

Trace Trace::from_ndjson(std::string_view text) {
  Trace t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      t.records.push_back(ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

struct Simulator::Admission {
  Outcome outcome = Outcome::Waiting;
  Allocation allocation;
  ExecutionEstimate estimate;
  std::string reason;
  ordered_json detail;
};

bool Simulator::Later::operator()(const SimEvent& a, const SimEvent& b) const {
  return std::tie(a.time_ms, a.kind, a.seq) > std::tie(b.time_ms, b.kind, b.seq);
}

namespace {

ordered_json resources_json(const Resources& r) { return ordered_json{{"cpu", r.cpu}, {"mem", r.mem}}; }

}  // namespace

Simulator::Simulator(Cluster cluster, Workload workload, SimConfig cfg) : cfg_(std::move(cfg)) {
  validate_cluster(cluster);
  const auto fingerprint = config_fingerprint(cluster, workload);
  state_.cluster = std::move(cluster);

  std::set<std::string> images;
  for (auto& arrival : workload) {
    validate_workflow(arrival.workflow);
    const auto id = arrival.workflow.workflow_id;
    if (arrival.arrival_ms < 0) throw Error(ErrorCode::InvalidTask, "workflow " + id + " arrives before t=0");
    if (runs_.count(id)) throw Error(ErrorCode::DuplicateTask, "workflow id " + id + " appears twice");
    WorkflowRun run;
    run.arrival_ms = arrival.arrival_ms;
    run.order = topological_order(arrival.workflow);
    for (const auto& t : arrival.workflow.tasks) {
      run.tasks[t.task_id];
      for (const auto& p : t.parents) run.children[p].push_back(t.task_id);
      images.insert(t.image_id);
    }
    task_total_ += arrival.workflow.tasks.size();
    run.spec = std::move(arrival.workflow);
    run_order_.push_back(id);
    runs_.emplace(id, std::move(run));
  }
  images_ = build_image_map(state_.cluster, images);

  auto& head = record("RunStart");
  head["strategy"] = to_string(cfg_.strategy);
  head["recovery"] = to_string(cfg_.recovery);
  head["seed"] = cfg_.seed;
  head["beta"] = cfg_.engine.beta;
  head["mem_floor"] = cfg_.engine.mem_floor;
  head["cpu_min"] = cfg_.engine.cpu_min;
  head["millicore_throughput"] = cfg_.engine.timing.millicore_throughput;
  head["instructions_per_millicore"] = cfg_.engine.timing.instructions_per_millicore;
  head["latency"] = ordered_json{{"oom_detection", cfg_.latency.oom_detection},
                                 {"pod_delete", cfg_.latency.pod_delete},
                                 {"reallocate", cfg_.latency.reallocate},
                                 {"pod_start", cfg_.latency.pod_start},
                                 {"retry", cfg_.latency.retry}};
  head["workflows"] = run_order_.size();
  head["tasks"] = task_total_;
  head["config"] = fingerprint;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : state_.cluster.nodes)
    nodes.push_back(ordered_json{{"ip", n.ip},
                                 {"tier", to_string(n.tier)},
                                 {"scene", n.scene},
                                 {"cpu", n.cpu_capacity},
                                 {"mem", n.mem_capacity}});
  head["nodes"] = std::move(nodes);

  for (const auto& id : run_order_) push(runs_.at(id).arrival_ms, EventKind::WorkflowArrival, id);
}

void Simulator::push(Millis t, EventKind kind, const std::string& wf, const std::string& task, int inc) {
  SimEvent e{t, kind, seq_++, wf, task, inc};
  emitted_.push_back(e);
  queue_.push(std::move(e));
}

void Simulator::schedule_requeue(Millis t) {
  if (requeue_at_ && *requeue_at_ == t) return;
  requeue_at_ = t;
  push(t, EventKind::TaskRequeue);
}

ordered_json& Simulator::record(const char* event) {
  trace_.records.push_back(ordered_json{{"t", now_}, {"event", event}});
  return trace_.records.back();
}

std::vector<SimEvent> Simulator::step() {
  if (queue_.empty()) throw Error(ErrorCode::IllegalTransition, "step() on an empty event queue");
  if (processed_ >= cfg_.event_budget)
    throw Error(ErrorCode::Nonterminating,
                "event budget of " + std::to_string(cfg_.event_budget) + " exhausted at t=" + std::to_string(now_));
  const SimEvent e = queue_.top();
  queue_.pop();
  ++processed_;
  now_ = e.time_ms;
  emitted_.clear();

  switch (e.kind) {
    case EventKind::WorkflowArrival: on_arrival(e); break;
    case EventKind::TaskReady: on_task_ready(e); break;
    case EventKind::AllocationGranted: on_granted(e); break;
    case EventKind::PodStart: on_pod_start(e); break;
    case EventKind::PodFinish: on_pod_finish(e); break;
    case EventKind::OomDetected: on_oom(e); break;
    case EventKind::PodDeleted: on_pod_deleted(e); break;
    case EventKind::TaskRequeue: on_requeue(e); break;
  }
  check_invariants();
  if (e.kind != EventKind::TaskRequeue) retry_armed_ = true;
  // Waiters evaluated together in one round count each other as competitors;
  // one later retry evaluates them apart. A retry that admits nothing does
  // not re-arm, so an infeasible queue still reaches quiescence.
  if (queue_.empty() && !waiters_.empty() && retry_armed_) {
    retry_armed_ = false;
    schedule_requeue(now_ + cfg_.latency.retry);
  }
  if (queue_.empty()) finish_run();
  return emitted_;
}

Trace Simulator::run() {
  while (!queue_.empty()) step();
  if (!finished_) finish_run();
  return trace_;
}

const NodeSpec& Simulator::gateway(const TaskSpec& task, const NodeSpec& host) const {
  if (host.tier == Tier::Edge || state_.cluster.nodes_of_tier(Tier::Edge).empty()) return host;
  return state_.cluster.gateway_for(task.scene_hint);
}

Millis Simulator::estimated_runtime(const TaskSpec& task, const NodeSpec& node, Millicores cpu) const {
  const auto est = execution_time(task, node, gateway(task, node), cpu, cfg_.engine.timing);
  return pod_runtime(task, est);
}

// Predicted start/end of every not-yet-created task of a workflow, from the
// actual lifecycles of its created pods.
void Simulator::project(WorkflowRun& run) {
  const auto& wf = run.spec.workflow_id;
  std::map<std::string, Millis> end;
  for (const auto& id : run.order) {
    const auto& st = run.tasks.at(id);
    if (st.failed) {
      end[id] = now_;
      continue;
    }
    if (st.done) {
      end[id] = st.finish_ms;
      continue;
    }
    auto& rec = store_.current_mut(wf, id);
    if (rec.alive) {
      end[id] = rec.lifecycle_end_ms + 1;
      continue;
    }
    const auto& task = run.spec.task(id);
    const auto rt = estimated_runtime(task, state_.cluster.node(rec.label.value), rec.request.cpu);
    if (st.ready) {
      rec.lifecycle_end_ms = rec.start_ms + rt - 1;
      end[id] = std::max(now_, rec.start_ms) + rt;
      continue;
    }
    Millis start = std::max(now_, st.earliest_ms);
    for (const auto& p : task.parents) start = std::max(start, end.at(p));
    rec.start_ms = start;
    rec.lifecycle_end_ms = start + rt - 1;
    end[id] = start + rt;
  }
}

void Simulator::on_arrival(const SimEvent& e) {
  auto& run = runs_.at(e.workflow_id);
  run.arrived = true;
  auto& r = record("WorkflowArrival");
  r["wf"] = e.workflow_id;
  r["tasks"] = run.spec.tasks.size();
  r["deadline"] = run.spec.deadline;

  // Provisional labels balance against capacity already promised to tasks
  // that have a label but no pod yet.
  auto projected = residual_resources(state_);
  for (const auto& rec : store_.all()) {
    if (rec.alive) continue;
    auto& res = projected[rec.label.value];
    res.cpu -= rec.request.cpu;
    res.mem -= rec.request.mem;
  }
  for (const auto& id : run.order) {
    const auto& task = run.spec.task(id);
    TaskRecord rec;
    rec.workflow_id = e.workflow_id;
    rec.task_id = id;
    rec.deadline_ms = task.deadline;
    rec.request = task_demand(task, cfg_.engine.timing);
    rec.start_ms = now_;
    store_.put(rec);
    const auto label = place(e.workflow_id, task, state_.cluster, projected, store_);
    auto& res = projected[label.value];
    res.cpu -= rec.request.cpu;
    res.mem -= rec.request.mem;
    store_.current_mut(e.workflow_id, id).image_address = images_.address(label.value, task.image_id);
  }
  project(run);
  for (const auto& id : run.order)
    if (run.spec.task(id).parents.empty()) push(now_, EventKind::TaskReady, e.workflow_id, id, 0);
}

bool Simulator::node_has_waiters(const std::string& ip) const {
  for (const auto& [wf, task] : waiters_) {
    const auto& st = runs_.at(wf).tasks.at(task);
    if (st.failed || st.done || !st.waiting) continue;
    if (store_.current(wf, task)->label.value == ip) return true;
  }
  return false;
}

void Simulator::on_task_ready(const SimEvent& e) {
  auto& run = runs_.at(e.workflow_id);
  auto& st = run.tasks.at(e.task_id);
  if (st.failed || st.done || e.incarnation != st.incarnation) return;
  st.ready = true;
  st.ready_ms = now_;
  const auto ip = store_.current(e.workflow_id, e.task_id)->label.value;
  auto& r = record("TaskReady");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = e.incarnation;
  r["node"] = ip;

  if (node_has_waiters(ip)) {
    enqueue_waiter(e.workflow_id, e.task_id, "behind earlier waiters");
    schedule_requeue(now_);
    return;
  }
  try_admit(e.workflow_id, e.task_id);
}

Simulator::Admission Simulator::decide(const std::string& wf, const TaskSpec& task, const NodeSpec& node,
                                       const TaskStatus& st) {
  Admission a;
  const auto& gw = gateway(task, node);
  const auto& timing = cfg_.engine.timing;
  const auto demand = task_demand(task, timing);

  const auto full = execution_time(task, node, gw, demand.cpu, timing);
  if (!meets_deadline(full, task)) {
    a.outcome = Outcome::Failed;
    a.reason = "deadline " + std::to_string(task.deadline) + " ms unreachable on " + node.ip + " (needs " +
               std::to_string(full.total_ms) + " ms at full demand)";
    return a;
  }

  std::optional<Allocation> grant;
  a.detail["request"] = resources_json(demand);
  if (cfg_.strategy == Strategy::FCFS) {
    const auto residual = residual_resources(state_).at(node.ip);
    a.detail["branch"] = "FCFS";
    if (residual.cpu >= demand.cpu && residual.mem >= demand.mem) {
      grant = Allocation{demand.cpu, demand.mem, node.ip, false};
      a.detail["verdict"] = "Granted";
    } else {
      a.reason = "residual below request";
    }
  } else {
    const auto r = allocate(wf, task, node, store_, state_, cfg_.engine);
    a.detail["branch"] = to_string(r.branch);
    a.detail["used"] = resources_json(r.assessment.used);
    a.detail["compete"] = resources_json(r.assessment.compete);
    if (r.granted()) {
      grant = r.allocation;
      a.detail["verdict"] = "Granted";
    } else if (r.headroom_exhausted) {
      a.reason = "node headroom exhausted";
    } else if (st.recovering) {
      a.reason = "re-allocation below mem_min + beta";
    } else if (r.allocation.mem < cfg_.engine.mem_floor || r.allocation.cpu < cfg_.engine.cpu_min) {
      a.reason = "scaled grant below memory floor";
    } else {
      grant = r.allocation;
      a.detail["verdict"] = "Undersized";
    }
  }
  if (!grant) return a;

  a.estimate = grant->cpu == demand.cpu ? full : execution_time(task, node, gw, grant->cpu, timing);
  if (!meets_deadline(a.estimate, task)) {
    a.reason = "scaled grant misses deadline";
    return a;
  }
  a.outcome = Outcome::Admitted;
  a.allocation = *grant;
  return a;
}

Simulator::Outcome Simulator::try_admit(const std::string& wf, const std::string& task_id) {
  auto& run = runs_.at(wf);
  auto& st = run.tasks.at(task_id);
  const auto& task = run.spec.task(task_id);
  auto& rec = store_.current_mut(wf, task_id);
  const auto& node = state_.cluster.node(rec.label.value);

  // The lifecycle window under evaluation starts now.
  rec.start_ms = now_;
  rec.lifecycle_end_ms = now_ + estimated_runtime(task, node, rec.request.cpu) - 1;
  project(run);

  auto a = decide(wf, task, node, st);
  if (a.outcome == Outcome::Failed) {
    fail_task(wf, task_id, a.reason);
    return a.outcome;
  }
  if (a.outcome == Outcome::Waiting) {
    // A waiting task keeps the time it became ready, so waiters queued in
    // earlier rounds do not count against each other.
    auto& again = store_.current_mut(wf, task_id);
    again.start_ms = st.ready_ms;
    project(run);
    if (!st.waiting) enqueue_waiter(wf, task_id, a.reason);
    return a.outcome;
  }

  const PodKey key{wf, task_id, st.incarnation};
  PodRecord pod;
  pod.workflow_id = wf;
  pod.task_id = task_id;
  pod.incarnation = st.incarnation;
  pod.node_ip = node.ip;
  pod.state = PodState::Pending;
  pod.allocated = a.allocation;
  pod.created_ms = now_;
  state_.pods[key] = pod;
  const auto runtime = pod_runtime(task, a.estimate);
  runtimes_[key] = runtime;

  auto& live = store_.current_mut(wf, task_id);
  live.alive = true;
  live.allocated_cpu = a.allocation.cpu;
  live.allocated_mem = a.allocation.mem;
  live.start_ms = now_;
  live.lifecycle_end_ms = now_ + runtime - 1;
  st.waiting = false;

  auto& d = a.detail;
  d["cpu"] = a.allocation.cpu;
  d["mem"] = a.allocation.mem;
  d["scaled"] = a.allocation.scaled;
  d["mem_min"] = task.mem_min;
  d["beta"] = cfg_.engine.beta;
  d["est_total"] = a.estimate.total_ms;
  d["deadline"] = task.deadline;
  d["meets_deadline"] = meets_deadline(a.estimate, task);
  d["runtime"] = runtime;
  d["image"] = live.image_address;
  grants_[key] = std::move(d);
  push(now_, EventKind::AllocationGranted, wf, task_id, st.incarnation);
  project(run);
  return Outcome::Admitted;
}

void Simulator::enqueue_waiter(const std::string& wf, const std::string& task_id, const std::string& reason) {
  auto& st = runs_.at(wf).tasks.at(task_id);
  st.waiting = true;
  waiters_.emplace_back(wf, task_id);
  auto& r = record("TaskWait");
  r["wf"] = wf;
  r["task"] = task_id;
  r["inc"] = st.incarnation;
  r["node"] = store_.current(wf, task_id)->label.value;
  r["reason"] = reason;
}

void Simulator::on_granted(const SimEvent& e) {
  const PodKey key{e.workflow_id, e.task_id, e.incarnation};
  const auto& pod = state_.pod(key);
  auto& r = record("AllocationGranted");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = e.incarnation;
  r["node"] = pod.node_ip;
  if (auto it = grants_.find(key); it != grants_.end()) {
    for (auto& [k, v] : it->second.items()) r[k] = v;
    grants_.erase(it);
  }
  push(now_ + cfg_.latency.pod_start, EventKind::PodStart, e.workflow_id, e.task_id, e.incarnation);
}

void Simulator::on_pod_start(const SimEvent& e) {
  const PodKey key{e.workflow_id, e.task_id, e.incarnation};
  auto& pod = state_.pod(key);
  if (pod.state != PodState::Pending)
    throw Error(ErrorCode::IllegalTransition,
                e.workflow_id + "/" + e.task_id + ": PodStart from " + to_string(pod.state));
  pod.state = PodState::Running;
  pod.started_ms = now_;
  const auto& task = runs_.at(e.workflow_id).spec.task(e.task_id);
  auto& r = record("PodStart");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = e.incarnation;
  r["node"] = pod.node_ip;
  r["runtime"] = runtimes_.at(key);
  if (detect_oom(pod, task, cfg_.engine.beta, now_))
    push(now_ + cfg_.latency.oom_detection, EventKind::OomDetected, e.workflow_id, e.task_id, e.incarnation);
  else
    push(now_ + runtimes_.at(key), EventKind::PodFinish, e.workflow_id, e.task_id, e.incarnation);
}

void Simulator::on_pod_finish(const SimEvent& e) {
  const PodKey key{e.workflow_id, e.task_id, e.incarnation};
  auto& pod = state_.pod(key);
  if (pod.state != PodState::Running)
    throw Error(ErrorCode::IllegalTransition,
                e.workflow_id + "/" + e.task_id + ": PodFinish from " + to_string(pod.state));
  pod.state = PodState::Succeeded;
  pod.finished_ms = now_;
  auto& run = runs_.at(e.workflow_id);
  auto& st = run.tasks.at(e.task_id);
  st.done = true;
  st.finish_ms = now_;
  ++run.finished;

  auto& r = record("PodFinish");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = e.incarnation;
  r["node"] = pod.node_ip;
  r["cpu"] = pod.allocated.cpu;
  r["mem"] = pod.allocated.mem;

  if (auto it = run.children.find(e.task_id); it != run.children.end()) {
    for (const auto& child : it->second) {
      const auto& cst = run.tasks.at(child);
      if (cst.failed || cst.ready) continue;
      const auto& parents = run.spec.task(child).parents;
      const bool all_done =
          std::all_of(parents.begin(), parents.end(), [&](const std::string& p) { return run.tasks.at(p).done; });
      if (all_done) push(now_, EventKind::TaskReady, e.workflow_id, child, cst.incarnation);
    }
  }
  if (run.finished == run.spec.tasks.size()) {
    auto& w = record("WorkflowComplete");
    w["wf"] = e.workflow_id;
    w["arrival"] = run.arrival_ms;
  }
  project(run);
  schedule_requeue(now_);
}

void Simulator::on_oom(const SimEvent& e) {
  const PodKey key{e.workflow_id, e.task_id, e.incarnation};
  auto& pod = state_.pod(key);
  if (pod.state != PodState::Running)
    throw Error(ErrorCode::IllegalTransition,
                e.workflow_id + "/" + e.task_id + ": OOMKilled from " + to_string(pod.state));
  pod.state = PodState::OOMKilled;
  pod.finished_ms = now_;
  const auto& task = runs_.at(e.workflow_id).spec.task(e.task_id);

  auto& r = record("OomDetected");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = e.incarnation;
  r["node"] = pod.node_ip;
  r["cpu"] = pod.allocated.cpu;
  r["mem"] = pod.allocated.mem;
  r["mem_min"] = task.mem_min;
  r["beta"] = cfg_.engine.beta;

  if (cfg_.recovery == Recovery::None) fail_task(e.workflow_id, e.task_id, "OOMKilled with recovery disabled");
  push(now_ + cfg_.latency.pod_delete, EventKind::PodDeleted, e.workflow_id, e.task_id, e.incarnation);
  schedule_requeue(now_);
}

void Simulator::on_pod_deleted(const SimEvent& e) {
  const PodKey key{e.workflow_id, e.task_id, e.incarnation};
  auto& pod = state_.pod(key);
  if (pod.state != PodState::OOMKilled)
    throw Error(ErrorCode::IllegalTransition,
                e.workflow_id + "/" + e.task_id + ": Deleted from " + to_string(pod.state));
  pod.state = PodState::Deleted;
  auto& run = runs_.at(e.workflow_id);
  auto& st = run.tasks.at(e.task_id);
  const auto& task = run.spec.task(e.task_id);
  {
    auto& r = record("PodDeleted");
    r["wf"] = e.workflow_id;
    r["task"] = e.task_id;
    r["inc"] = e.incarnation;
    r["node"] = pod.node_ip;
  }
  if (st.failed) return;

  const auto old = *store_.current(e.workflow_id, e.task_id);
  TaskRecord next = old;
  next.incarnation = old.incarnation + 1;
  next.alive = false;
  next.allocated_cpu = 0;
  next.allocated_mem = 0;
  st.incarnation = next.incarnation;
  st.ready = false;
  st.recovering = true;
  st.earliest_ms = now_ + cfg_.latency.reallocate;
  next.start_ms = st.earliest_ms;
  store_.put(next);

  const OomEvent ev{e.workflow_id, e.task_id, task.image_id, pod.node_ip, now_, pod.allocated};
  std::string kind = "stay";
  std::string note;
  auto try_roam = [&] {
    try {
      roam(ev, state_, store_);
      kind = "roam";
      return true;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NoAlternativeNode) throw;
      note = err.what();
      return false;
    }
  };
  auto try_offload = [&] {
    if (state_.cluster.node(pod.node_ip).tier != Tier::Edge) {
      note = "task already runs on a cloud node";
      return false;
    }
    try {
      offload(ev, state_, store_, images_);
      kind = "offload";
      return true;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NoCloudCapacity) throw;
      note = err.what();
      return false;
    }
  };
  switch (cfg_.recovery) {
    case Recovery::Roam: try_roam(); break;
    case Recovery::Offload: try_offload(); break;
    case Recovery::RoamThenOffload: try_roam() || try_offload(); break;
    case Recovery::None: break;
  }

  const auto cur = *store_.current(e.workflow_id, e.task_id);
  auto& r = record("Recovery");
  r["wf"] = e.workflow_id;
  r["task"] = e.task_id;
  r["inc"] = cur.incarnation;
  r["kind"] = kind;
  r["from"] = pod.node_ip;
  r["to"] = cur.label.value;
  r["old_cpu"] = pod.allocated.cpu;
  r["old_mem"] = pod.allocated.mem;
  r["old_image"] = old.image_address;
  r["new_image"] = cur.image_address;
  r["ready_at"] = st.earliest_ms;
  if (!note.empty()) r["note"] = note;

  project(run);
  push(st.earliest_ms, EventKind::TaskReady, e.workflow_id, e.task_id, cur.incarnation);
  schedule_requeue(now_);
}

void Simulator::on_requeue(const SimEvent&) {
  if (requeue_at_ && *requeue_at_ == now_) requeue_at_.reset();
  if (waiters_.empty()) return;

  std::deque<std::pair<std::string, std::string>> still;
  std::set<std::string> blocked;  // FCFS: a waiting head blocks its node
  std::size_t admitted = 0;
  const auto pass = waiters_;
  for (const auto& [wf, task_id] : pass) {
    const auto& st = runs_.at(wf).tasks.at(task_id);
    if (st.failed || st.done || !st.waiting) continue;
    const auto ip = store_.current(wf, task_id)->label.value;
    if (cfg_.strategy == Strategy::FCFS && blocked.count(ip)) {
      still.emplace_back(wf, task_id);
      continue;
    }
    switch (try_admit(wf, task_id)) {
      case Outcome::Admitted: ++admitted; break;
      case Outcome::Failed: break;
      case Outcome::Waiting:
        still.emplace_back(wf, task_id);
        blocked.insert(ip);
        break;
    }
  }
  waiters_ = std::move(still);
  if (admitted > 0) retry_armed_ = true;
  auto& r = record("TaskRequeue");
  r["admitted"] = admitted;
  r["waiting"] = waiters_.size();
}

void Simulator::fail_descendants(WorkflowRun& run, const std::string& task_id) {
  auto it = run.children.find(task_id);
  if (it == run.children.end()) return;
  for (const auto& child : it->second) {
    auto& cst = run.tasks.at(child);
    if (cst.failed || cst.done) continue;
    cst.failed = true;
    cst.waiting = false;
    if (auto rec = store_.current(run.spec.workflow_id, child); rec && !rec->alive)
      store_.erase(run.spec.workflow_id, child, rec->incarnation);
    auto& r = record("TaskFailed");
    r["wf"] = run.spec.workflow_id;
    r["task"] = child;
    r["reason"] = "ancestor " + task_id + " failed";
    fail_descendants(run, child);
  }
}

void Simulator::fail_task(const std::string& wf, const std::string& task_id, const std::string& reason) {
  auto& run = runs_.at(wf);
  auto& st = run.tasks.at(task_id);
  if (st.failed) return;
  st.failed = true;
  st.waiting = false;
  if (auto rec = store_.current(wf, task_id); rec && !rec->alive) store_.erase(wf, task_id, rec->incarnation);
  {
    auto& r = record("TaskFailed");
    r["wf"] = wf;
    r["task"] = task_id;
    r["reason"] = reason;
  }
  fail_descendants(run, task_id);
  if (!run.failed) {
    run.failed = true;
    auto& r = record("WorkflowFailed");
    r["wf"] = wf;
    r["task"] = task_id;
  }
}

void Simulator::check_invariants() const {
  for (const auto& [ip, res] : residual_resources(state_)) {
    if (res.cpu < 0 || res.mem < 0)
      throw Error(ErrorCode::IllegalTransition, "capacity exceeded on " + ip + " at t=" + std::to_string(now_) +
                                                    " (residual cpu " + std::to_string(res.cpu) + "m, mem " +
                                                    std::to_string(res.mem) + "Mi)");
  }
}

void Simulator::finish_run() {
  const auto stranded = waiters_;
  waiters_.clear();
  for (const auto& [wf, task_id] : stranded) {
    const auto& st = runs_.at(wf).tasks.at(task_id);
    if (st.failed || st.done || !st.waiting) continue;
    fail_task(wf, task_id, "stranded: no admissible allocation at quiescence");
  }
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t wf_done = 0;
  for (const auto& id : run_order_) {
    const auto& run = runs_.at(id);
    for (const auto& [tid, st] : run.tasks) {
      if (st.done) ++succeeded;
      if (st.failed) ++failed;
    }
    if (run.finished == run.spec.tasks.size()) ++wf_done;
  }
  if (cfg_.dump_store) {
    for (const auto& rec : store_.all()) {
      auto& r = record("StoreRecord");
      r["wf"] = rec.workflow_id;
      r["task"] = rec.task_id;
      r["inc"] = rec.incarnation;
      r["label"] = rec.label.str();
      r["alive"] = rec.alive;
      r["start"] = rec.start_ms;
      r["lifecycle_end"] = rec.lifecycle_end_ms;
      r["deadline"] = rec.deadline_ms;
      r["request"] = resources_json(rec.request);
      r["allocated"] = resources_json({rec.allocated_cpu, rec.allocated_mem});
      r["image"] = rec.image_address;
    }
  }
  auto& r = record("RunEnd");
  r["events"] = processed_;
  r["tasks_succeeded"] = succeeded;
  r["tasks_failed"] = failed;
  r["workflows_completed"] = wf_done;
  r["store_puts"] = store_.put_count();
  r["store_deletes"] = store_.delete_count();
  finished_ = true;
}

Trace run(const Cluster& cluster, const Workload& workload, const SimConfig& cfg) {
  return Simulator(cluster, workload, cfg).run();
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void add(std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  void add(std::int64_t v) { add(std::to_string(v)); }
};

}  // namespace

std::string config_fingerprint(const Cluster& cluster, const Workload& workload) {
  Fnv f;
  for (const auto& n : cluster.nodes) {
    f.add(n.node_id);
    f.add(n.ip);
    f.add(to_string(n.tier));
    f.add(n.scene);
    f.add(n.cpu_capacity);
    f.add(n.mem_capacity);
    f.add(n.device_bandwidth.str());
    f.add(n.uplink_bandwidth.str());
    for (const auto& img : n.image_cache) f.add(img);
  }
  for (const auto& [edge, cloud] : cluster.cloud_scene_for) {
    f.add(edge);
    f.add(cloud);
  }
  for (const auto& a : workload) {
    f.add(a.arrival_ms);
    f.add(a.workflow.workflow_id);
    f.add(a.workflow.deadline);
    for (const auto& t : a.workflow.tasks) {
      f.add(t.task_id);
      for (const auto& p : t.parents) f.add(p);
      f.add(t.data_volume);
      f.add(t.image_id);
      f.add(t.image_size);
      f.add(t.instructions_per_byte.str());
      f.add(t.cpu_request);
      f.add(t.mem_request);
      f.add(t.mem_min);
      f.add(t.duration);
      f.add(t.deadline);
      f.add(to_string(t.role));
      f.add(t.scene_hint);
      f.add(t.pinned_ip.value_or(""));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

}  // namespace kces
