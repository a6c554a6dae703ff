#include <doctest.h>

#include <string>

#include "kces/error.hpp"
#include "kces/formats.hpp"
#include "kces/injector.hpp"

using namespace kces;

namespace {

std::string parse_error(const std::string& text, bool cluster) {
  try {
    if (cluster)
      parse_cluster(text);
    else
      parse_workload(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    return e.what();
  }
  FAIL("expected ParseError");
  return {};
}

bool has(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

const std::string kNode =
    "node id=n ip=10.0.0.1 tier=edge scene=edge-1 cpu=4000 mem=2048 device_bw=12500000 uplink_bw=12500000 images=\n";

}  // namespace

TEST_CASE("bundled cluster") {
  const auto c = default_cluster();
  CHECK(c.nodes.size() == 6);
  CHECK(c.nodes_of_tier(Tier::Cloud).size() == 2);
  CHECK(c.nodes_in_scene("edge-2").size() == 2);
  CHECK(c.paired_cloud_scene("edge-1") == "cloud");
  CHECK(c.node("192.168.0.163").cpu_capacity == 4000);
  CHECK(c.node("192.168.0.161").mem_capacity == 2048);
  CHECK(load_cluster(std::string(KCES_DATA_DIR) + "/testbed_cluster.txt") == c);
}

TEST_CASE("cluster text round-trips") {
  const auto c = default_cluster();
  CHECK(parse_cluster(format_cluster(c)) == c);
  CHECK(format_cluster(parse_cluster(format_cluster(c))) == format_cluster(c));
}

TEST_CASE("workload text round-trips") {
  auto params = IotWorkflowParams::defaults();
  for (std::uint64_t seed : {1, 2}) {
    const auto w = make_workload(pyramid_schedule(3, 7), params, seed);
    CHECK(parse_workload(format_workload(w)) == w);
  }
  const auto replay = load_workload(std::string(KCES_DATA_DIR) + "/replays/roam.workload.txt");
  CHECK(replay.size() == 2);
  CHECK(replay[1].workflow.task("T9").pinned_ip == "192.168.0.163");
  CHECK(parse_workload(format_workload(replay)) == replay);
}

TEST_CASE("cluster parse errors") {
  CHECK(has(parse_error("", true), "missing header"));
  CHECK(has(parse_error("# kces-workload v1\n", true), "expected header"));
  parse_error("# kces-cluster v1\n", true);  // no nodes

  const auto unknown = parse_error("# kces-cluster v1\n" + kNode.substr(0, kNode.size() - 1) + " colour=red\n", true);
  CHECK(has(unknown, "line 2"));
  CHECK(has(unknown, "colour"));

  const auto twice = parse_error("# kces-cluster v1\n# comment\nnode cpu=1 " + kNode.substr(5), true);
  CHECK(has(twice, "line 3"));
  CHECK(has(twice, "given twice"));

  std::string bad_int = kNode;
  bad_int.replace(bad_int.find("cpu=4000"), 8, "cpu=four");
  CHECK(has(parse_error("# kces-cluster v1\n" + bad_int, true), "not an integer"));

  CHECK(has(parse_error("# kces-cluster v1\n" + kNode + "rack r1\n", true), "unknown record"));
}

TEST_CASE("workload parse errors") {
  CHECK(has(parse_error("# kces-cluster v1\n", false), "expected header"));
  CHECK(has(parse_error("# kces-workload v1\ntask id=T0\n", false), "task before any workflow"));
  const auto missing = parse_error("# kces-workload v1\nworkflow id=w arrival=0\n", false);
  CHECK(has(missing, "line 2"));
  CHECK(has(missing, "deadline"));
}

TEST_CASE("missing files name the path") {
  try {
    load_cluster("/nonexistent/cluster.txt");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(has(e.what(), "/nonexistent/cluster.txt"));
  }
}
