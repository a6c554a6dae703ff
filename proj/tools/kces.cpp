#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kces/error.hpp"
#include "kces/experiment.hpp"
#include "kces/formats.hpp"
#include "kces/metrics.hpp"

namespace {

void add_pattern_options(CLI::App& app, kces::PatternParams& p, std::string& pattern) {
  app.add_option("--pattern", pattern, "Arrival pattern: constant, linear or pyramid")
      ->check(CLI::IsMember({"constant", "linear", "pyramid"}));
  app.add_option("--batch", p.batch, "Workflows per burst (constant)");
  app.add_option("--k", p.k, "Burst increment (linear)");
  app.add_option("--d", p.d, "First burst size (linear)");
  app.add_option("--peak", p.peak, "Peak burst size (pyramid)");
  app.add_option("--total", p.total, "Total workflows");
  app.add_option("--interval", p.interval_ms, "Milliseconds between bursts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kces: cloud-edge workflow scheduling simulator"};
  app.require_subcommand(1);

  // run -------------------------------------------------------------------
  kces::ExperimentConfig cfg;
  if (const char* env = std::getenv("KCES_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  std::string config_file;
  std::string pattern = "constant";
  std::vector<std::string> strategies{"kces", "fcfs"};
  std::string recovery = "roam";

  auto* run = app.add_subcommand("run", "Run an experiment and write traces, summaries and a comparison");
  run->add_option("--config", config_file, "Experiment config JSON; flags given on the command line override it")
      ->check(CLI::ExistingFile);
  run->add_option("--cluster", cfg.cluster_path, "Cluster file (default: bundled testbed)")->check(CLI::ExistingFile);
  run->add_option("--workload", cfg.workload_path, "Workload file (default: generated from the pattern)")
      ->check(CLI::ExistingFile);
  add_pattern_options(*run, cfg.pattern, pattern);
  run->add_option("--strategy", strategies, "Strategies to run (kces, fcfs)")->delimiter(',');
  run->add_option("--recovery", recovery, "OOM recovery: roam, offload, roam-offload or none")
      ->check(CLI::IsMember({"roam", "offload", "roam-offload", "none"}));
  run->add_option("--seeds", cfg.seeds, "Seeds, comma separated")->delimiter(',');
  run->add_option("--out", cfg.output_dir, "Output directory (env KCES_OUTPUT_DIR)");
  run->add_option("--oom-delay", cfg.latency.oom_detection, "Pod start to OOM detection (ms)");
  run->add_option("--delete-delay", cfg.latency.pod_delete, "OOM detection to pod deletion (ms)");
  run->add_option("--realloc-delay", cfg.latency.reallocate, "Pod deletion to re-allocation (ms)");
  run->add_option("--start-delay", cfg.latency.pod_start, "Allocation to pod start (ms)");
  run->add_option("--beta", cfg.beta, "Memory headroom above mem_min (Mi)");
  run->add_option("--floor", cfg.mem_floor, "Smallest memory grant that is created (Mi)");
  run->add_option("--throughput", cfg.millicore_throughput, "Bytes processed per millicore-second");
  run->add_option("--event-budget", cfg.event_budget, "Abort a run after this many events");

  // export-cluster ---------------------------------------------------------
  std::string cluster_out;
  auto* export_cluster = app.add_subcommand("export-cluster", "Print the bundled default cluster file");
  export_cluster->add_option("--out", cluster_out, "Write to this file instead of stdout");

  // export-workload --------------------------------------------------------
  kces::PatternParams wl_pattern;
  std::string wl_kind = "constant";
  std::uint64_t wl_seed = 1;
  std::string workload_out;
  auto* export_workload = app.add_subcommand("export-workload", "Print a generated workload file");
  add_pattern_options(*export_workload, wl_pattern, wl_kind);
  export_workload->add_option("--seed", wl_seed, "Seed for per-task data volumes");
  export_workload->add_option("--out", workload_out, "Write to this file instead of stdout");

  // summarize --------------------------------------------------------------
  std::string trace_path;
  std::string summary_cluster;
  auto* summarize = app.add_subcommand("summarize", "Recompute the summary of a trace file");
  summarize->add_option("trace", trace_path, "trace.ndjson")->required()->check(CLI::ExistingFile);
  summarize->add_option("--cluster", summary_cluster, "Cluster file the trace ran on (default: bundled)")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!config_file.empty()) {
        auto base = kces::experiment_from_json(nlohmann::json::parse(kces::read_file(config_file)));
        // Re-apply explicit flags on top of the file.
        auto set = [&](const char* flag, auto apply) {
          if (run->count(flag) > 0) apply(base);
        };
        set("--cluster", [&](auto& b) { b.cluster_path = cfg.cluster_path; });
        set("--workload", [&](auto& b) { b.workload_path = cfg.workload_path; });
        set("--batch", [&](auto& b) { b.pattern.batch = cfg.pattern.batch; });
        set("--k", [&](auto& b) { b.pattern.k = cfg.pattern.k; });
        set("--d", [&](auto& b) { b.pattern.d = cfg.pattern.d; });
        set("--peak", [&](auto& b) { b.pattern.peak = cfg.pattern.peak; });
        set("--total", [&](auto& b) { b.pattern.total = cfg.pattern.total; });
        set("--interval", [&](auto& b) { b.pattern.interval_ms = cfg.pattern.interval_ms; });
        set("--seeds", [&](auto& b) { b.seeds = cfg.seeds; });
        set("--out", [&](auto& b) { b.output_dir = cfg.output_dir; });
        set("--oom-delay", [&](auto& b) { b.latency.oom_detection = cfg.latency.oom_detection; });
        set("--delete-delay", [&](auto& b) { b.latency.pod_delete = cfg.latency.pod_delete; });
        set("--realloc-delay", [&](auto& b) { b.latency.reallocate = cfg.latency.reallocate; });
        set("--start-delay", [&](auto& b) { b.latency.pod_start = cfg.latency.pod_start; });
        set("--beta", [&](auto& b) { b.beta = cfg.beta; });
        set("--floor", [&](auto& b) { b.mem_floor = cfg.mem_floor; });
        set("--throughput", [&](auto& b) { b.millicore_throughput = cfg.millicore_throughput; });
        set("--event-budget", [&](auto& b) { b.event_budget = cfg.event_budget; });
        if (run->count("--pattern") == 0) pattern = kces::to_string(base.pattern.kind);
        if (run->count("--recovery") == 0) recovery = kces::to_string(base.recovery);
        if (run->count("--strategy") == 0) {
          strategies.clear();
          for (auto s : base.strategies) strategies.push_back(kces::to_string(s));
        }
        cfg = base;
      }
      cfg.pattern.kind = kces::parse_pattern(pattern);
      cfg.recovery = kces::parse_recovery(recovery);
      cfg.strategies.clear();
      for (const auto& s : strategies) cfg.strategies.push_back(kces::parse_strategy(s));

      const auto result = kces::run_experiment(cfg);
      std::cout << result.report;
      std::cout << "artifacts in " << cfg.output_dir << "\n";
      return result.exit_code;
    }
    if (export_cluster->parsed()) {
      if (cluster_out.empty())
        std::cout << kces::default_cluster_text();
      else
        kces::write_file(cluster_out, kces::default_cluster_text());
      return 0;
    }
    if (export_workload->parsed()) {
      wl_pattern.kind = kces::parse_pattern(wl_kind);
      const auto text = kces::format_workload(
          kces::make_workload(wl_pattern.schedule(), kces::IotWorkflowParams::defaults(), wl_seed));
      if (workload_out.empty())
        std::cout << text;
      else
        kces::write_file(workload_out, text);
      return 0;
    }
    if (summarize->parsed()) {
      const auto cluster = summary_cluster.empty() ? kces::default_cluster() : kces::load_cluster(summary_cluster);
      const auto trace = kces::Trace::from_ndjson(kces::read_file(trace_path));
      std::cout << kces::to_json(kces::summarize(trace, cluster)).dump(2) << "\n";
      return 0;
    }
  } catch (const kces::Error& e) {
    std::cerr << "kces: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kces: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
