#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include "kces/collab.hpp"
#include "kces/error.hpp"
#include "kces/formats.hpp"
#include "support/builders.hpp"

using namespace kces;

namespace {

// Default testbed with one OOM-killed pod of `task` on `ip`.
struct Scene {
  ClusterState state;
  TaskStore store;
  NodeTaskImageMap images;
  OomEvent event;

  Scene(const std::string& task, const std::string& ip) {
    state.cluster = default_cluster();
    images = build_image_map(state.cluster, {"iot/collect", "iot/process"});
    auto p = fixture::pod("wf-0", task, ip, PodState::OOMKilled, 333, 45);
    fixture::add(state, p);
    auto rec = fixture::record("wf-0", task, state.cluster.node(ip).label(), 0, 10, {400, 433});
    rec.image_address = images.address(ip, "iot/collect");
    store.put(rec);
    event = {"wf-0", task, "iot/collect", ip, 63'000, p.allocated};
  }
  void load(const std::string& ip, Millicores cpu, MiB mem) {
    fixture::add(state, fixture::pod("bg", "L" + std::to_string(state.pods.size()), ip, PodState::Running, cpu, mem));
  }
};

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

TEST_CASE("detect_oom fires strictly below mem_min + beta") {
  auto task = fixture::task("T9", {}, 400, 630, 200);
  auto pod = fixture::pod("wf-3", "T9", "192.168.0.163", PodState::Running, 400, 199);
  const auto ev = detect_oom(pod, task, 20, 21'000);
  REQUIRE(ev);
  CHECK(ev->time_ms == 21'000);
  CHECK(ev->allocated.mem == 199);
  CHECK(ev->node_ip == "192.168.0.163");

  pod.allocated.mem = 220;
  CHECK_FALSE(detect_oom(pod, task, 20, 0));
  pod.allocated.mem = 45;
  CHECK(detect_oom(pod, task, 20, 0));
  pod.state = PodState::Succeeded;
  CHECK_FALSE(detect_oom(pod, task, 20, 0));
}

TEST_CASE("roaming moves a task to its scene peer") {
  Scene s("T5", "192.168.0.163");
  const auto label = roam(s.event, s.state, s.store);
  CHECK(label == Label{"edge-1", "192.168.0.164"});
  CHECK(s.store.current("wf-0", "T5")->label.value == "192.168.0.164");
  CHECK(s.store.current("wf-0", "T5")->image_address == "registry.edge/arm64/iot/collect");
  CHECK(s.state.pod({"wf-0", "T5", 0}).state == PodState::Deleted);
}

TEST_CASE("roaming needs another node in the scene") {
  Scene s("T5", "192.168.0.163");
  s.state.cluster.nodes.erase(s.state.cluster.nodes.begin() + 3);  // drop .164
  CHECK(code_of([&] { roam(s.event, s.state, s.store); }) == ErrorCode::NoAlternativeNode);

  Scene full("T5", "192.168.0.163");
  full.load("192.168.0.164", 4000, 100);
  CHECK(code_of([&] { roam(full.event, full.state, full.store); }) == ErrorCode::NoAlternativeNode);
}

TEST_CASE("roaming picks the roomiest of several peers") {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 300; ++round) {
    Scene s("T5", "192.168.0.163");
    s.state.cluster.nodes.push_back(fixture::edge("node-7", "192.168.0.167", "edge-1"));
    std::map<std::string, Resources> free;
    for (const auto* ip : {"192.168.0.164", "192.168.0.167"}) {
      const auto cpu = Millicores(rng() % 4) * 1000;
      const auto mem = MiB(rng() % 4) * 500;
      s.load(ip, cpu, mem);
      free[ip] = {4000 - cpu, 2048 - mem};
    }
    std::string best;
    for (const auto& [ip, r] : free) {
      if (best.empty()) {
        best = ip;
        continue;
      }
      const auto& b = free[best];
      if (r.mem > b.mem || (r.mem == b.mem && r.cpu > b.cpu)) best = ip;
    }
    REQUIRE(roam(s.event, s.state, s.store).value == best);
  }
}

TEST_CASE("offloading moves an edge task to the paired cloud scene") {
  SUBCASE("edge-2 task lands on the emptier cloud node") {
    Scene s("T19", "192.168.0.166");
    s.load("192.168.0.161", 500, 1000);
    const auto label = offload(s.event, s.state, s.store, s.images);
    CHECK(label == Label{"node-2", "192.168.0.162"});
    CHECK(s.store.current("wf-0", "T19")->image_address == "registry.cloud/amd64/iot/collect");
  }
  SUBCASE("tie goes to the lower ip") {
    Scene s("T1", "192.168.0.163");
    CHECK(offload(s.event, s.state, s.store, s.images).value == "192.168.0.161");
    CHECK(s.state.pod({"wf-0", "T1", 0}).state == PodState::Deleted);
  }
  SUBCASE("no cloud headroom") {
    Scene s("T1", "192.168.0.163");
    s.load("192.168.0.161", 1000, 10);
    s.load("192.168.0.162", 10, 2048);
    CHECK(code_of([&] { offload(s.event, s.state, s.store, s.images); }) == ErrorCode::NoCloudCapacity);
  }
  SUBCASE("cloud-hosted task") {
    Scene s("T0", "192.168.0.161");
    CHECK(code_of([&] { offload(s.event, s.state, s.store, s.images); }) == ErrorCode::IllegalTransition);
  }
}

TEST_CASE("label and image maps") {
  const auto cluster = default_cluster();
  const auto labels = cluster_node_label_map(cluster);
  std::vector<std::string> ips;
  for (const auto& [key, list] : labels) ips.insert(ips.end(), list.begin(), list.end());
  std::sort(ips.begin(), ips.end());
  CHECK(std::adjacent_find(ips.begin(), ips.end()) == ips.end());
  CHECK(ips.size() == cluster.nodes.size());
  CHECK(labels.at("edge-1") == std::vector<std::string>{"192.168.0.163", "192.168.0.164"});
  CHECK(labels.at("node-1") == std::vector<std::string>{"192.168.0.161"});

  const auto images = build_image_map(cluster, {"a", "b"});
  for (const auto* n : cluster.nodes_of_tier(Tier::Cloud)) {
    CHECK(images.address(n->ip, "a") == "registry.cloud/amd64/a");
    CHECK(images.address(n->ip, "b") == "registry.cloud/amd64/b");
  }
  CHECK(images.address("192.168.0.163", "a") != images.address("192.168.0.161", "a"));
  CHECK_THROWS_AS(images.address("192.168.0.161", "zzz"), Error);
}
