#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "kces/error.hpp"
#include "kces/formats.hpp"
#include "kces/injector.hpp"
#include "kces/model.hpp"
#include "support/builders.hpp"

using namespace kces;
using fixture::task;
using fixture::workflow;

namespace {

ErrorCode code_of(const WorkflowSpec& wf) {
  try {
    validate_workflow(wf);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("workflow unexpectedly valid");
  return ErrorCode::ParseError;
}

// Random DAG over n tasks: edges only from lower to higher index, every task
// after the first linked to some earlier task, all sources feeding one sink.
WorkflowSpec random_dag(std::mt19937_64& rng, int n) {
  std::vector<TaskSpec> tasks;
  for (int i = 0; i < n; ++i) {
    std::set<std::string> parents;
    if (i > 0) parents.insert("T" + std::to_string(rng() % i));
    for (int j = 0; j < i; ++j)
      if (rng() % 4 == 0) parents.insert("T" + std::to_string(j));
    tasks.push_back(task("T" + std::to_string(i), parents));
  }
  std::set<std::string> has_child;
  for (const auto& t : tasks) has_child.insert(t.parents.begin(), t.parents.end());
  std::set<std::string> leaves;
  for (const auto& t : tasks)
    if (!has_child.count(t.task_id)) leaves.insert(t.task_id);
  tasks.push_back(task("sink", leaves));
  return workflow("rand", tasks);
}

}  // namespace

TEST_CASE("the 21-task IoT instance validates") {
  const auto wf = build_iot_workflow("wf-0", IotWorkflowParams::defaults(), 1);
  CHECK(wf.tasks.size() == 21);
  CHECK_NOTHROW(validate_workflow(wf));
}

TEST_CASE("a single task whose deadline equals the workflow's is valid") {
  CHECK_NOTHROW(validate_workflow(workflow("one", {task("T0")})));
}

TEST_CASE("structural violations are named") {
  SUBCASE("two tasks parenting each other") {
    CHECK(code_of(workflow("w", {task("A", {"B"}), task("B", {"A"})})) == ErrorCode::CycleDetected);
  }
  SUBCASE("unknown parent") {
    CHECK(code_of(workflow("w", {task("A", {"Z"})})) == ErrorCode::DanglingParent);
  }
  SUBCASE("sink deadline differs from the workflow deadline") {
    auto wf = workflow("w", {task("A"), task("B", {"A"})});
    wf.deadline += 1;
    CHECK(code_of(wf) == ErrorCode::DeadlineMismatch);
  }
  SUBCASE("duplicate task id") {
    CHECK(code_of(workflow("w", {task("A"), task("A")})) == ErrorCode::DuplicateTask);
  }
  SUBCASE("two components") {
    CHECK(code_of(workflow("w", {task("A"), task("B")})) == ErrorCode::Disconnected);
  }
  SUBCASE("two sinks") {
    CHECK(code_of(workflow("w", {task("A"), task("B", {"A"}), task("C", {"A"})})) == ErrorCode::MultipleSinks);
  }
  SUBCASE("mem_min above the request") {
    auto t = task("A");
    t.mem_min = t.mem_request + 1;
    CHECK(code_of(workflow("w", {t})) == ErrorCode::InvalidTask);
  }
  SUBCASE("non-positive duration") {
    auto t = task("A");
    t.duration = 0;
    CHECK(code_of(workflow("w", {t})) == ErrorCode::InvalidTask);
  }
}

TEST_CASE("ready_tasks on the IoT instance") {
  const auto wf = build_iot_workflow("wf-0", IotWorkflowParams::defaults(), 1);
  CHECK(ready_tasks(wf, {}) == std::set<std::string>{"T0"});
  std::set<std::string> all;
  for (const auto& t : wf.tasks) all.insert(t.task_id);
  CHECK(ready_tasks(wf, all).empty());
}

TEST_CASE("ready_tasks matches a brute-force scan on random DAGs") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 300; ++round) {
    const auto wf = random_dag(rng, 2 + int(rng() % 7));
    std::set<std::string> completed;
    for (const auto& t : wf.tasks)
      if (rng() % 2) completed.insert(t.task_id);

    // Adjacency matrix scan, independent of the parent sets' iteration.
    const auto n = wf.tasks.size();
    std::vector<std::vector<bool>> edge(n, std::vector<bool>(n));
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[wf.tasks[i].task_id] = i;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& p : wf.tasks[i].parents) edge[index[p]][i] = true;
    std::set<std::string> expected;
    for (std::size_t c = 0; c < n; ++c) {
      if (completed.count(wf.tasks[c].task_id)) continue;
      bool ok = true;
      for (std::size_t p = 0; p < n; ++p)
        if (edge[p][c] && !completed.count(wf.tasks[p].task_id)) ok = false;
      if (ok) expected.insert(wf.tasks[c].task_id);
    }
    REQUIRE(ready_tasks(wf, completed) == expected);
  }
}

TEST_CASE("topological order puts every parent first") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 300; ++round) {
    const auto wf = random_dag(rng, 1 + int(rng() % 11));
    REQUIRE_NOTHROW(validate_workflow(wf));
    const auto order = topological_order(wf);
    REQUIRE(order.size() == wf.tasks.size());
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& t : wf.tasks)
      for (const auto& p : t.parents) REQUIRE(pos.at(p) < pos.at(t.task_id));
  }
}

TEST_CASE("labels map one-to-one onto node ips") {
  const auto cluster = default_cluster();
  std::set<std::string> values;
  for (const auto& n : cluster.nodes) {
    const auto l = n.label();
    CHECK(l.value == n.ip);
    CHECK(l.key == (n.tier == Tier::Edge ? n.scene : n.node_id));
    values.insert(l.value);
  }
  CHECK(values.size() == cluster.nodes.size());
}

TEST_CASE("cluster lookups") {
  const auto cluster = default_cluster();
  CHECK(cluster.node("192.168.0.163").scene == "edge-1");
  CHECK(cluster.find("10.0.0.1") == nullptr);
  CHECK_THROWS_AS(cluster.node("10.0.0.1"), Error);
  CHECK(cluster.nodes_of_tier(Tier::Cloud).size() == 2);
  CHECK(cluster.nodes_in_scene("edge-2").size() == 2);
  CHECK(cluster.paired_cloud_scene("edge-1") == "cloud");
  CHECK(cluster.gateway_for("edge-2").ip == "192.168.0.165");
  CHECK(cluster.gateway_for("nowhere").ip == "192.168.0.163");
  CHECK(cluster.node("192.168.0.161").has_image("anything"));
  CHECK_FALSE(cluster.node("192.168.0.163").has_image("iot/process"));
}

TEST_CASE("only pending and running pods hold resources") {
  ClusterState s;
  s.cluster.nodes.push_back(fixture::edge("n", "10.0.0.1", "edge-1"));
  fixture::add(s, fixture::pod("w", "A", "10.0.0.1", PodState::Pending, 100, 10));
  fixture::add(s, fixture::pod("w", "B", "10.0.0.1", PodState::Running, 200, 20));
  fixture::add(s, fixture::pod("w", "C", "10.0.0.1", PodState::Succeeded, 400, 40));
  fixture::add(s, fixture::pod("w", "D", "10.0.0.1", PodState::OOMKilled, 800, 80));
  fixture::add(s, fixture::pod("w", "E", "10.0.0.1", PodState::Deleted, 1600, 160));
  CHECK(s.used_on("10.0.0.1") == Resources{300, 30});
  CHECK_THROWS_AS(s.pod({"w", "Z", 0}), Error);
}

TEST_CASE("cluster validation") {
  Cluster c;
  CHECK_THROWS_AS(validate_cluster(c), Error);
  c.nodes.push_back(fixture::edge("a", "10.0.0.1", "edge-1"));
  CHECK_NOTHROW(validate_cluster(c));
  c.nodes.push_back(fixture::edge("b", "10.0.0.1", "edge-1"));
  CHECK_THROWS_AS(validate_cluster(c), Error);
  c.nodes.back().ip = "10.0.0.2";
  c.nodes.back().mem_capacity = 0;
  CHECK_THROWS_AS(validate_cluster(c), Error);
}

TEST_CASE("enum spellings round-trip") {
  CHECK(parse_tier(to_string(Tier::Cloud)) == Tier::Cloud);
  CHECK(parse_role(to_string(Role::EdgeBound)) == Role::EdgeBound);
  CHECK_THROWS_AS(parse_tier("fog"), Error);
  CHECK(to_string(PodState::OOMKilled) == "OOMKilled");
}
