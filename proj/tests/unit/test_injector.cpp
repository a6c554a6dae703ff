#include <doctest.h>

#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>

#include "kces/error.hpp"
#include "kces/injector.hpp"

using namespace kces;

namespace {

std::vector<int> sizes(const ArrivalSchedule& s) {
  std::vector<int> out;
  for (const auto& b : s.bursts) out.push_back(b.count);
  return out;
}

void check_shape(const ArrivalSchedule& s, int total, Millis interval) {
  int sum = 0;
  for (std::size_t i = 0; i < s.bursts.size(); ++i) {
    REQUIRE(s.bursts[i].count >= 1);
    REQUIRE(s.bursts[i].time_ms == Millis(i) * interval);
    sum += s.bursts[i].count;
  }
  REQUIRE(sum == total);
  REQUIRE(s.total == total);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("constant schedule") {
  const auto s = constant_schedule(2, 10, 300'000);
  CHECK(sizes(s) == std::vector<int>{2, 2, 2, 2, 2});
  CHECK(s.bursts.back().time_ms == 1'200'000);
  CHECK(sizes(constant_schedule(1, 1)) == std::vector<int>{1});
  CHECK(sizes(constant_schedule(5, 10)) == std::vector<int>{5, 5});
  CHECK(code_of([] { constant_schedule(3, 10); }) == ErrorCode::IndivisibleTotal);
  CHECK(code_of([] { constant_schedule(0, 10); }) == ErrorCode::InvalidSchedule);
}

TEST_CASE("linear schedule") {
  CHECK(sizes(linear_schedule(1, 1, 10)) == std::vector<int>{1, 2, 3, 4});
  CHECK(code_of([] { linear_schedule(0, 1, 10); }) == ErrorCode::InvalidSchedule);

  const auto s = linear_schedule(2, 1, 9);
  CHECK(sizes(s) == std::vector<int>{1, 3, 5});
  // Cumulative sums of an arithmetic series d + ik.
  const auto v = sizes(s);
  std::vector<int> cum(v.size());
  std::partial_sum(v.begin(), v.end(), cum.begin());
  for (int i = 0; i < 3; ++i) CHECK(cum[i] == (i + 1) * 1 + 2 * i * (i + 1) / 2);
}

TEST_CASE("linear schedule truncates the final burst") {
  CHECK(sizes(linear_schedule(1, 1, 8)) == std::vector<int>{1, 2, 3, 2});
  CHECK(sizes(linear_schedule(3, 4, 5)) == std::vector<int>{4, 1});
}

TEST_CASE("pyramid schedule") {
  CHECK(sizes(pyramid_schedule(3, 17)) == std::vector<int>{1, 2, 3, 2, 1, 2, 3, 2, 1});
  CHECK(sizes(pyramid_schedule(2, 4)) == std::vector<int>{1, 2, 1});
  CHECK(code_of([] { pyramid_schedule(1, 4); }) == ErrorCode::InvalidSchedule);
}

TEST_CASE("schedules keep their sums, spacing and step sizes") {
  std::mt19937_64 rng(53);
  for (int round = 0; round < 500; ++round) {
    const int total = 1 + int(rng() % 60);
    const Millis interval = 1 + Millis(rng() % 1000);
    const int peak = 2 + int(rng() % 5);
    const auto p = pyramid_schedule(peak, total, interval);
    check_shape(p, total, interval);
    const auto v = sizes(p);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      // The last burst may be cut short; every other step moves by one,
      // climbing from 1 to the peak and back.
      if (i + 2 == v.size()) break;
      REQUIRE(std::abs(v[i + 1] - v[i]) == 1);
      REQUIRE(v[i] <= peak);
    }
    const int k = 1 + int(rng() % 4), d = 1 + int(rng() % 4);
    check_shape(linear_schedule(k, d, total, interval), total, interval);
  }
}

TEST_CASE("IoT workflow defaults") {
  const auto params = IotWorkflowParams::defaults();
  const auto wf = build_iot_workflow("wf-0", params, 9);
  REQUIRE(wf.tasks.size() == 21);
  CHECK(params.task_count() == 21);
  CHECK_NOTHROW(validate_workflow(wf));
  CHECK(wf.tasks.back().task_id == "T20");
  CHECK(wf.deadline == wf.task("T20").deadline);

  CHECK(wf.task("T0").role == Role::CloudBound);
  CHECK(wf.task("T12").role == Role::CloudBound);
  CHECK(wf.task("T20").role == Role::CloudBound);
  CHECK(wf.task("T12").parents.size() > 1);  // in-tree join
  for (int i = 1; i <= 8; ++i) CHECK(wf.task("T" + std::to_string(i)).parents == std::set<std::string>{"T0"});
  for (const auto& t : wf.tasks) {
    if (t.role == Role::CloudBound) continue;
    CHECK((t.scene_hint == "edge-1" || t.scene_hint == "edge-2"));
    for (const auto& p : t.parents) {
      const auto& parent = wf.task(p);
      if (parent.role == Role::EdgeBound) CHECK(parent.scene_hint == t.scene_hint);
    }
  }
}

TEST_CASE("single-task layers form a seven-task chain") {
  auto params = IotWorkflowParams::defaults();
  params.edge_layers = {1, 1, 1, 1};
  const auto wf = build_iot_workflow("chain", params);
  REQUIRE(wf.tasks.size() == 7);
  CHECK_NOTHROW(validate_workflow(wf));
  CHECK(wf.tasks[0].parents.empty());
  for (std::size_t i = 1; i < 7; ++i) CHECK(wf.tasks[i].parents == std::set<std::string>{wf.tasks[i - 1].task_id});
}

TEST_CASE("workloads scale by 21 tasks per workflow") {
  const auto params = IotWorkflowParams::defaults();
  for (int n : {2, 4, 6, 8, 10}) {
    const auto w = make_workload(constant_schedule(n / 2, n), params, 1);
    std::size_t tasks = 0;
    for (const auto& a : w) tasks += a.workflow.tasks.size();
    CHECK(tasks == std::size_t(21 * n));
    CHECK(w.front().workflow.workflow_id == "wf-0");
    CHECK(w.back().workflow.workflow_id == "wf-" + std::to_string(n - 1));
    CHECK(w.back().arrival_ms == 300'000);
  }
}

TEST_CASE("data jitter is seeded and bounded") {
  const auto params = IotWorkflowParams::defaults();
  const auto a = build_iot_workflow("w", params, 77);
  CHECK(a == build_iot_workflow("w", params, 77));
  CHECK_FALSE(a == build_iot_workflow("w", params, 78));
  for (const auto& t : a.tasks) {
    const auto base = t.role == Role::CloudBound ? params.cloud.data_volume : params.collect.data_volume;
    CHECK(t.data_volume >= base * 90 / 100);
    CHECK(t.data_volume <= base * 110 / 100);
  }
  auto flat = params;
  flat.data_jitter_pct = 0;
  CHECK(build_iot_workflow("w", flat, 1).task("T5").data_volume == params.collect.data_volume);
}
