#include "kces/experiment.hpp"

#include <filesystem>
#include <map>

#include "kces/error.hpp"
#include "kces/formats.hpp"

namespace kces {

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::Constant: return "constant";
    case Pattern::Linear: return "linear";
    case Pattern::Pyramid: return "pyramid";
  }
  return "?";
}

Pattern parse_pattern(const std::string& s) {
  if (s == "constant") return Pattern::Constant;
  if (s == "linear") return Pattern::Linear;
  if (s == "pyramid") return Pattern::Pyramid;
  throw Error(ErrorCode::ConfigError, "unknown pattern '" + s + "' (expected constant, linear or pyramid)");
}

ArrivalSchedule PatternParams::schedule() const {
  switch (kind) {
    case Pattern::Constant: return constant_schedule(batch, total, interval_ms);
    case Pattern::Linear: return linear_schedule(k, d, total, interval_ms);
    case Pattern::Pyramid: return pyramid_schedule(peak, total, interval_ms);
  }
  throw Error(ErrorCode::ConfigError, "bad pattern");
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ConfigError, what);
  };
  need(!seeds.empty(), "at least one seed is required");
  need(!strategies.empty(), "at least one strategy is required");
  need(latency.oom_detection > 0 && latency.pod_delete > 0 && latency.reallocate > 0,
       "latency constants must be positive");
  need(latency.pod_start >= 0, "pod start delay must be non-negative");
  need(latency.retry > 0, "retry tick must be positive");
  need(beta > 0, "beta must be positive");
  need(mem_floor > 0, "memory floor must be positive");
  need(millicore_throughput > 0 && instructions_per_millicore > 0, "throughput constants must be positive");
  need(event_budget > 0, "event budget must be positive");
  need(!output_dir.empty(), "output directory must be set");
  for (const auto* path : {&cluster_path, &workload_path})
    if (!path->empty() && !std::filesystem::exists(*path))
      throw Error(ErrorCode::IoError, "file not found: '" + *path + "'");
  if (workload_path.empty()) pattern.schedule();
}

SimConfig ExperimentConfig::sim_config(Strategy strategy, std::uint64_t seed) const {
  SimConfig s;
  s.strategy = strategy;
  s.recovery = recovery;
  s.seed = seed;
  s.latency = latency;
  s.engine.beta = beta;
  s.engine.mem_floor = mem_floor;
  s.engine.timing.millicore_throughput = millicore_throughput;
  s.engine.timing.instructions_per_millicore = instructions_per_millicore;
  s.event_budget = event_budget;
  return s;
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json strategies = nlohmann::ordered_json::array();
  for (auto s : c.strategies) strategies.push_back(to_string(s));
  return {{"cluster", c.cluster_path},
          {"workload", c.workload_path},
          {"pattern",
           {{"kind", to_string(c.pattern.kind)},
            {"batch", c.pattern.batch},
            {"k", c.pattern.k},
            {"d", c.pattern.d},
            {"peak", c.pattern.peak},
            {"total", c.pattern.total},
            {"interval_ms", c.pattern.interval_ms}}},
          {"strategies", strategies},
          {"recovery", to_string(c.recovery)},
          {"seeds", c.seeds},
          {"latency",
           {{"oom_detection_ms", c.latency.oom_detection},
            {"pod_delete_ms", c.latency.pod_delete},
            {"reallocate_ms", c.latency.reallocate},
            {"pod_start_ms", c.latency.pod_start},
            {"retry_ms", c.latency.retry}}},
          {"beta", c.beta},
          {"mem_floor", c.mem_floor},
          {"millicore_throughput", c.millicore_throughput},
          {"instructions_per_millicore", c.instructions_per_millicore},
          {"event_budget", c.event_budget},
          {"output_dir", c.output_dir}};
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  // Missing keys keep their defaults so hand-written configs can be partial.
  ExperimentConfig c;
  try {
    auto get = [&](const nlohmann::json& obj, const char* key, auto& dst) {
      if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get(j, "cluster", c.cluster_path);
    get(j, "workload", c.workload_path);
    if (j.contains("pattern")) {
      const auto& p = j.at("pattern");
      if (p.contains("kind")) c.pattern.kind = parse_pattern(p.at("kind").get<std::string>());
      get(p, "batch", c.pattern.batch);
      get(p, "k", c.pattern.k);
      get(p, "d", c.pattern.d);
      get(p, "peak", c.pattern.peak);
      get(p, "total", c.pattern.total);
      get(p, "interval_ms", c.pattern.interval_ms);
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    if (j.contains("recovery")) c.recovery = parse_recovery(j.at("recovery").get<std::string>());
    get(j, "seeds", c.seeds);
    if (j.contains("latency")) {
      const auto& l = j.at("latency");
      get(l, "oom_detection_ms", c.latency.oom_detection);
      get(l, "pod_delete_ms", c.latency.pod_delete);
      get(l, "reallocate_ms", c.latency.reallocate);
      get(l, "pod_start_ms", c.latency.pod_start);
      get(l, "retry_ms", c.latency.retry);
    }
    get(j, "beta", c.beta);
    get(j, "mem_floor", c.mem_floor);
    get(j, "millicore_throughput", c.millicore_throughput);
    get(j, "instructions_per_millicore", c.instructions_per_millicore);
    get(j, "event_budget", c.event_budget);
    get(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("experiment config: ") + e.what());
  }
  return c;
}

Cluster experiment_cluster(const ExperimentConfig& cfg) {
  return cfg.cluster_path.empty() ? default_cluster() : load_cluster(cfg.cluster_path);
}

Workload experiment_workload(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.workload_path.empty()) return load_workload(cfg.workload_path);
  return make_workload(cfg.pattern.schedule(), IotWorkflowParams::defaults(), seed);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto cluster = experiment_cluster(cfg);
  const std::filesystem::path out(cfg.output_dir);
  write_file((out / "config.json").string(), to_json(cfg).dump(2) + "\n");

  ExperimentResult result;
  std::map<std::uint64_t, std::map<Strategy, RunSummary>> by_seed;
  for (auto seed : cfg.seeds) {
    const auto workload = experiment_workload(cfg, seed);
    for (auto strategy : cfg.strategies) {
      RunOutcome o;
      o.strategy = strategy;
      o.seed = seed;
      o.directory = (out / (to_string(strategy) + "-seed" + std::to_string(seed))).string();
      try {
        const auto trace = run(cluster, workload, cfg.sim_config(strategy, seed));
        o.summary = summarize(trace, cluster);
        write_file(o.directory + "/trace.ndjson", trace.to_ndjson());
        write_file(o.directory + "/summary.json", to_json(o.summary).dump(2) + "\n");
        write_file(o.directory + "/timeseries.csv", to_csv(time_series(trace, cluster)));
        o.ok = o.summary.tasks_succeeded == o.summary.tasks;
        if (!o.ok)
          o.error = std::to_string(o.summary.tasks - o.summary.tasks_succeeded) + " of " +
                    std::to_string(o.summary.tasks) + " tasks did not succeed";
        by_seed[seed][strategy] = o.summary;
      } catch (const Error& e) {
        o.error = e.what();
      }
      result.runs.push_back(std::move(o));
    }
  }

  std::string report;
  for (const auto& [seed, runs] : by_seed) {
    report += "seed " + std::to_string(seed) + "\n";
    auto k = runs.find(Strategy::KCES);
    auto f = runs.find(Strategy::FCFS);
    if (k != runs.end() && f != runs.end()) report += compare(k->second, f->second).str();
    report += "\n";
  }
  std::vector<GridColumn> grid;
  for (auto strategy : cfg.strategies) {
    GridColumn col{to_string(cfg.pattern.kind), to_string(strategy), {}};
    for (const auto& [seed, runs] : by_seed)
      if (auto it = runs.find(strategy); it != runs.end()) col.runs.push_back(it->second);
    grid.push_back(std::move(col));
  }
  report += format_grid(grid);
  for (const auto& o : result.runs)
    if (!o.ok) {
      report += "FAILED " + to_string(o.strategy) + " seed " + std::to_string(o.seed) + ": " + o.error + "\n";
      result.exit_code = 1;
    }
  write_file((out / "comparison.txt").string(), report);
  result.report = std::move(report);
  return result;
}

}  // namespace kces
