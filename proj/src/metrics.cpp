#include "kces/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "kces/error.hpp"

namespace kces {

using nlohmann::ordered_json;

namespace {

using TaskKey = std::pair<std::string, std::string>;
using PodId = std::tuple<std::string, std::string, int>;

TaskKey task_key(const ordered_json& r) { return {r.at("wf").get<std::string>(), r.at("task").get<std::string>()}; }
PodId pod_id(const ordered_json& r) {
  return {r.at("wf").get<std::string>(), r.at("task").get<std::string>(), r.at("inc").get<int>()};
}

Resources capacity_of(const Cluster& cluster) {
  Resources c;
  for (const auto& n : cluster.nodes) {
    c.cpu += n.cpu_capacity;
    c.mem += n.mem_capacity;
  }
  return c;
}

struct Span {
  Millis first_arrival = 0;
  Millis end = 0;
  bool any = false;
};

Span run_span(const Trace& trace) {
  Span s;
  for (const auto& r : trace.records) {
    const auto& ev = r.at("event");
    const Millis t = r.at("t").get<Millis>();
    if (ev == "WorkflowArrival" && (!s.any || t < s.first_arrival)) {
      s.first_arrival = t;
      s.any = true;
    }
  }
  s.end = s.first_arrival;
  for (const auto& r : trace.records) {
    const auto& ev = r.at("event");
    if (ev == "PodFinish" || ev == "PodDeleted") s.end = std::max(s.end, r.at("t").get<Millis>());
  }
  return s;
}

// Walks allocation changes in trace order, calling f(t, cpu, mem) with the
// totals in force from t onward.
template <class F>
void for_each_allocation(const Trace& trace, F&& f) {
  std::map<PodId, Resources> held;
  Resources cur;
  for (const auto& r : trace.records) {
    const auto& ev = r.at("event");
    if (ev == "AllocationGranted") {
      const Resources a{r.at("cpu").get<Millicores>(), r.at("mem").get<MiB>()};
      held[pod_id(r)] = a;
      cur.cpu += a.cpu;
      cur.mem += a.mem;
    } else if (ev == "PodFinish" || ev == "OomDetected") {
      auto it = held.find(pod_id(r));
      if (it == held.end()) continue;
      cur.cpu -= it->second.cpu;
      cur.mem -= it->second.mem;
      held.erase(it);
    } else {
      continue;
    }
    f(r.at("t").get<Millis>(), cur);
  }
}

}  // namespace

RunSummary summarize(const Trace& trace, const Cluster& cluster) {
  const ordered_json* head = nullptr;
  const ordered_json* tail = nullptr;
  for (const auto& r : trace.records) {
    if (r.at("event") == "RunStart") head = &r;
    if (r.at("event") == "RunEnd") tail = &r;
  }
  if (!head) throw Error(ErrorCode::IncompleteTrace, "trace has no RunStart record");
  if (!tail) throw Error(ErrorCode::IncompleteTrace, "trace has no RunEnd record (run did not reach quiescence)");

  RunSummary s;
  s.strategy = head->at("strategy").get<std::string>();
  s.recovery = head->at("recovery").get<std::string>();
  s.seed = head->at("seed").get<std::uint64_t>();
  s.config = head->at("config").get<std::string>();
  s.workflows = head->at("workflows").get<std::size_t>();
  s.tasks = head->at("tasks").get<std::size_t>();

  const auto span = run_span(trace);
  s.total_duration_ms = span.end - span.first_arrival;

  std::map<std::string, Millis> first_start;
  std::map<std::string, Millis> last_finish;
  std::set<TaskKey> succeeded;
  std::map<TaskKey, RecoveryLifecycle> open;
  for (const auto& r : trace.records) {
    const auto& ev = r.at("event");
    const Millis t = r.at("t").get<Millis>();
    if (ev == "PodStart") {
      const auto wf = r.at("wf").get<std::string>();
      if (!first_start.count(wf)) first_start[wf] = t;
    } else if (ev == "PodFinish") {
      const auto key = task_key(r);
      last_finish[key.first] = t;
      succeeded.insert(key);
      if (auto it = open.find(key); it != open.end()) {
        it->second.end_ms = t;
        s.recoveries.push_back(it->second);
        open.erase(it);
      }
    } else if (ev == "OomDetected") {
      ++s.oom_count;
      const auto key = task_key(r);
      if (!open.count(key)) open[key] = RecoveryLifecycle{key.first, key.second, "stay", t, t};
    } else if (ev == "Recovery") {
      const auto kind = r.at("kind").get<std::string>();
      if (kind == "roam") ++s.roam_count;
      if (kind == "offload") ++s.offload_count;
      if (auto it = open.find(task_key(r)); it != open.end()) it->second.kind = kind;
    } else if (ev == "WorkflowComplete") {
      ++s.workflows_completed;
    }
  }

  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : trace.records) {
    if (r.at("event") != "WorkflowComplete") continue;
    const auto wf = r.at("wf").get<std::string>();
    sum += static_cast<double>(last_finish.at(wf) - first_start.at(wf));
    ++n;
  }
  s.avg_workflow_duration_ms = n ? sum / static_cast<double>(n) : 0.0;

  s.tasks_succeeded = succeeded.size();
  s.success_rate = s.tasks ? static_cast<double>(s.tasks_succeeded) / static_cast<double>(s.tasks) : 1.0;
  if (s.tasks) {
    s.roam_pct = 100.0 * static_cast<double>(s.roam_count) / static_cast<double>(s.tasks);
    s.offload_pct = 100.0 * static_cast<double>(s.offload_count) / static_cast<double>(s.tasks);
  }

  const auto cap = capacity_of(cluster);
  if (s.total_duration_ms > 0 && cap.cpu > 0 && cap.mem > 0) {
    // Integer area under the allocation step functions.
    __int128 cpu_area = 0;
    __int128 mem_area = 0;
    Millis last = span.first_arrival;
    Resources cur;
    for_each_allocation(trace, [&](Millis t, const Resources& now_held) {
      const Millis from = std::max(last, span.first_arrival);
      const Millis to = std::min(t, span.end);
      if (to > from) {
        cpu_area += static_cast<__int128>(cur.cpu) * (to - from);
        mem_area += static_cast<__int128>(cur.mem) * (to - from);
      }
      last = std::max(last, t);
      cur = now_held;
    });
    if (span.end > last) {
      cpu_area += static_cast<__int128>(cur.cpu) * (span.end - last);
      mem_area += static_cast<__int128>(cur.mem) * (span.end - last);
    }
    const auto dur = static_cast<double>(s.total_duration_ms);
    s.cpu_usage_mean = static_cast<double>(cpu_area) / (static_cast<double>(cap.cpu) * dur);
    s.mem_usage_mean = static_cast<double>(mem_area) / (static_cast<double>(cap.mem) * dur);
  }
  return s;
}

ordered_json to_json(const RunSummary& s) {
  ordered_json rec = ordered_json::array();
  for (const auto& l : s.recoveries)
    rec.push_back(ordered_json{{"wf", l.workflow_id},
                               {"task", l.task_id},
                               {"kind", l.kind},
                               {"start_ms", l.start_ms},
                               {"end_ms", l.end_ms}});
  return ordered_json{{"strategy", s.strategy},
                      {"recovery", s.recovery},
                      {"seed", s.seed},
                      {"config", s.config},
                      {"workflows", s.workflows},
                      {"workflows_completed", s.workflows_completed},
                      {"tasks", s.tasks},
                      {"tasks_succeeded", s.tasks_succeeded},
                      {"total_duration_ms", s.total_duration_ms},
                      {"total_duration_min", minutes(static_cast<double>(s.total_duration_ms))},
                      {"avg_workflow_duration_ms", s.avg_workflow_duration_ms},
                      {"avg_workflow_duration_min", minutes(s.avg_workflow_duration_ms)},
                      {"cpu_usage_mean", s.cpu_usage_mean},
                      {"mem_usage_mean", s.mem_usage_mean},
                      {"oom_count", s.oom_count},
                      {"roam_count", s.roam_count},
                      {"offload_count", s.offload_count},
                      {"roam_pct", s.roam_pct},
                      {"offload_pct", s.offload_pct},
                      {"success_rate", s.success_rate},
                      {"recoveries", std::move(rec)}};
}

RunSummary summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.strategy = j.at("strategy").get<std::string>();
    s.recovery = j.at("recovery").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config = j.at("config").get<std::string>();
    s.workflows = j.at("workflows").get<std::size_t>();
    s.workflows_completed = j.at("workflows_completed").get<std::size_t>();
    s.tasks = j.at("tasks").get<std::size_t>();
    s.tasks_succeeded = j.at("tasks_succeeded").get<std::size_t>();
    s.total_duration_ms = j.at("total_duration_ms").get<Millis>();
    s.avg_workflow_duration_ms = j.at("avg_workflow_duration_ms").get<double>();
    s.cpu_usage_mean = j.at("cpu_usage_mean").get<double>();
    s.mem_usage_mean = j.at("mem_usage_mean").get<double>();
    s.oom_count = j.at("oom_count").get<std::size_t>();
    s.roam_count = j.at("roam_count").get<std::size_t>();
    s.offload_count = j.at("offload_count").get<std::size_t>();
    s.roam_pct = j.at("roam_pct").get<double>();
    s.offload_pct = j.at("offload_pct").get<double>();
    s.success_rate = j.at("success_rate").get<double>();
    for (const auto& l : j.at("recoveries"))
      s.recoveries.push_back({l.at("wf").get<std::string>(), l.at("task").get<std::string>(),
                              l.at("kind").get<std::string>(), l.at("start_ms").get<Millis>(),
                              l.at("end_ms").get<Millis>()});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("summary: ") + e.what());
  }
}

std::string minutes(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", ms / 60000.0);
  return buf;
}

std::vector<UsageSample> time_series(const Trace& trace, const Cluster& cluster, Millis step_ms) {
  if (step_ms <= 0) throw Error(ErrorCode::ConfigError, "sampling step must be positive");
  const auto span = run_span(trace);
  std::vector<UsageSample> out;
  if (!span.any) return out;
  const auto cap = capacity_of(cluster);

  std::vector<std::pair<Millis, Resources>> steps;
  for_each_allocation(trace, [&](Millis t, const Resources& held) { steps.emplace_back(t, held); });
  std::vector<Millis> arrivals;
  for (const auto& r : trace.records)
    if (r.at("event") == "WorkflowArrival") arrivals.push_back(r.at("t").get<Millis>());

  std::size_t si = 0;
  std::size_t ai = 0;
  Resources cur;
  for (Millis t = span.first_arrival; t <= span.end; t += step_ms) {
    while (si < steps.size() && steps[si].first <= t) cur = steps[si++].second;
    while (ai < arrivals.size() && arrivals[ai] <= t) ++ai;
    UsageSample s;
    s.time_ms = t - span.first_arrival;
    s.cpu = cap.cpu ? static_cast<double>(cur.cpu) / static_cast<double>(cap.cpu) : 0.0;
    s.mem = cap.mem ? static_cast<double>(cur.mem) / static_cast<double>(cap.mem) : 0.0;
    s.workflows = ai;
    out.push_back(s);
  }
  return out;
}

std::string to_csv(const std::vector<UsageSample>& samples) {
  std::string out = "time_s,cpu_usage,mem_usage,workflows\n";
  char buf[128];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,%zu\n", static_cast<long long>(s.time_ms / 1000), s.cpu, s.mem,
                  s.workflows);
    out += buf;
  }
  return out;
}

ComparisonReport compare(const RunSummary& a, const RunSummary& b) {
  if (a.config != b.config)
    throw Error(ErrorCode::ConfigMismatch,
                "runs use different cluster/workload configurations (" + a.config + " vs " + b.config + ")");
  ComparisonReport rep;
  rep.label_a = a.strategy;
  rep.label_b = b.strategy;
  auto row = [&](std::string name, double x, double y) {
    rep.rows.push_back({std::move(name), x, y, x - y, y != 0 ? (y - x) / y : 0.0});
  };
  row("total_duration_min", static_cast<double>(a.total_duration_ms) / 60000.0,
      static_cast<double>(b.total_duration_ms) / 60000.0);
  row("avg_workflow_duration_min", a.avg_workflow_duration_ms / 60000.0, b.avg_workflow_duration_ms / 60000.0);
  row("cpu_usage_mean", a.cpu_usage_mean, b.cpu_usage_mean);
  row("mem_usage_mean", a.mem_usage_mean, b.mem_usage_mean);
  row("oom_count", static_cast<double>(a.oom_count), static_cast<double>(b.oom_count));
  row("roam_count", static_cast<double>(a.roam_count), static_cast<double>(b.roam_count));
  row("offload_count", static_cast<double>(a.offload_count), static_cast<double>(b.offload_count));
  row("success_rate", a.success_rate, b.success_rate);
  return rep;
}

std::string ComparisonReport::str() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %12s %12s %12s %10s\n", "metric", label_a.c_str(), label_b.c_str(), "delta",
                "saving");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %12.4f %12.4f %12.4f %9.1f%%\n", r.metric.c_str(), r.a, r.b, r.delta,
                  100.0 * r.saving);
    os << buf;
  }
  return os.str();
}

Stat aggregate(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

std::string format_grid(const std::vector<GridColumn>& columns) {
  struct Metric {
    const char* name;
    double (*get)(const RunSummary&);
    const char* fmt;
  };
  static const Metric metrics[] = {
      {"Total workflow duration (min)",
       [](const RunSummary& s) { return static_cast<double>(s.total_duration_ms) / 60000.0; }, "%.1f+-%.1f"},
      {"Average workflow duration (min)", [](const RunSummary& s) { return s.avg_workflow_duration_ms / 60000.0; },
       "%.1f+-%.1f"},
      {"CPU resource usage", [](const RunSummary& s) { return s.cpu_usage_mean; }, "%.3f+-%.3f"},
      {"Memory resource usage", [](const RunSummary& s) { return s.mem_usage_mean; }, "%.3f+-%.3f"},
  };
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-34s", "");
  os << buf;
  for (const auto& c : columns) {
    std::snprintf(buf, sizeof buf, " %16s", (c.pattern + "/" + c.strategy).c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%-34s", m.name);
    os << buf;
    for (const auto& c : columns) {
      std::vector<double> v;
      for (const auto& r : c.runs) v.push_back(m.get(r));
      const auto st = aggregate(v);
      char cell[64];
      std::snprintf(cell, sizeof cell, m.fmt, st.mean, st.stddev);
      std::snprintf(buf, sizeof buf, " %16s", cell);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace kces
