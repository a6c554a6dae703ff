#include "kces/formats.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "kces/error.hpp"

namespace kces {

namespace {

constexpr std::string_view kClusterHeader = "# kces-cluster v1";
constexpr std::string_view kWorkloadHeader = "# kces-workload v1";

struct Line {
  std::size_t number = 0;
  std::string keyword;
  std::vector<std::string> positional;
  std::map<std::string, std::string> fields;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Splits into lines, checks the header and tokenizes the remaining
// non-comment lines.
std::vector<Line> tokenize(std::string_view text, std::string_view header) {
  std::vector<Line> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t n = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++n;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (!seen_header) {
      if (raw.substr(first) != header)
        fail(n, "expected header '" + std::string(header) + "', got '" + raw.substr(first) + "'");
      seen_header = true;
      continue;
    }
    if (raw[first] == '#') continue;
    Line line;
    line.number = n;
    std::istringstream words(raw);
    std::string w;
    words >> line.keyword;
    while (words >> w) {
      const auto eq = w.find('=');
      if (eq == std::string::npos) {
        line.positional.push_back(w);
        continue;
      }
      auto key = w.substr(0, eq);
      if (!line.fields.emplace(key, w.substr(eq + 1)).second) fail(n, "field '" + key + "' given twice");
    }
    out.push_back(std::move(line));
  }
  if (!seen_header) fail(n, "empty file (missing header '" + std::string(header) + "')");
  return out;
}

class Fields {
 public:
  explicit Fields(const Line& line) : line_(line) {}

  const std::string& str(const std::string& key) {
    auto it = line_.fields.find(key);
    if (it == line_.fields.end()) fail(line_.number, "missing field '" + key + "'");
    used_.push_back(key);
    return it->second;
  }
  std::optional<std::string> opt(const std::string& key) {
    if (!line_.fields.count(key)) return std::nullopt;
    return str(key);
  }
  std::int64_t integer(const std::string& key) {
    const auto& v = str(key);
    try {
      std::size_t pos = 0;
      const auto x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(line_.number, "field '" + key + "': '" + v + "' is not an integer");
    }
  }
  Rational rational(const std::string& key) {
    const auto& v = str(key);
    try {
      return Rational::parse(v);
    } catch (const std::exception&) {
      fail(line_.number, "field '" + key + "': '" + v + "' is not a number");
    }
  }
  std::vector<std::string> list(const std::string& key) {
    std::vector<std::string> out;
    std::istringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ','))
      if (!item.empty()) out.push_back(item);
    return out;
  }
  void finish() {
    for (const auto& [k, v] : line_.fields)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        fail(line_.number, "unknown field '" + k + "' on '" + line_.keyword + "' line");
  }
  template <class F>
  auto wrap(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError && std::string(e.what()).find("line ") != std::string::npos) throw;
      fail(line_.number, e.what());
    }
  }

 private:
  const Line& line_;
  std::vector<std::string> used_;
};

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += ',';
    out += i;
  }
  return out;
}

}  // namespace

Cluster parse_cluster(std::string_view text) {
  Cluster c;
  std::size_t last_line = 0;
  for (const auto& line : tokenize(text, kClusterHeader)) {
    last_line = line.number;
    Fields f(line);
    if (line.keyword == "node") {
      if (!line.positional.empty()) fail(line.number, "unexpected token '" + line.positional[0] + "'");
      NodeSpec n;
      n.node_id = f.str("id");
      n.ip = f.str("ip");
      n.tier = f.wrap([&] { return parse_tier(f.str("tier")); });
      n.scene = f.str("scene");
      n.cpu_capacity = f.integer("cpu");
      n.mem_capacity = f.integer("mem");
      n.device_bandwidth = f.rational("device_bw");
      n.uplink_bandwidth = f.rational("uplink_bw");
      for (auto& img : f.list("images")) n.image_cache.insert(img);
      f.finish();
      c.nodes.push_back(std::move(n));
    } else if (line.keyword == "pair") {
      if (line.positional.size() != 2 || !line.fields.empty())
        fail(line.number, "expected 'pair <edge-scene> <cloud-scene>'");
      c.cloud_scene_for[line.positional[0]] = line.positional[1];
    } else {
      fail(line.number, "unknown record '" + line.keyword + "'");
    }
  }
  try {
    validate_cluster(c);
  } catch (const Error& e) {
    fail(last_line, e.what());
  }
  return c;
}

std::string format_cluster(const Cluster& cluster) {
  std::string out{kClusterHeader};
  out += '\n';
  for (const auto& n : cluster.nodes) {
    out += "node id=" + n.node_id + " ip=" + n.ip + " tier=" + to_string(n.tier) + " scene=" + n.scene +
           " cpu=" + std::to_string(n.cpu_capacity) + " mem=" + std::to_string(n.mem_capacity) +
           " device_bw=" + n.device_bandwidth.str() + " uplink_bw=" + n.uplink_bandwidth.str() +
           " images=" + join(n.image_cache) + "\n";
  }
  for (const auto& [edge, cloud] : cluster.cloud_scene_for) out += "pair " + edge + " " + cloud + "\n";
  return out;
}

Cluster load_cluster(const std::string& path) {
  try {
    return parse_cluster(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

Workload parse_workload(std::string_view text) {
  Workload w;
  for (const auto& line : tokenize(text, kWorkloadHeader)) {
    Fields f(line);
    if (!line.positional.empty()) fail(line.number, "unexpected token '" + line.positional[0] + "'");
    if (line.keyword == "workflow") {
      WorkflowArrival a;
      a.workflow.workflow_id = f.str("id");
      a.workflow.deadline = f.integer("deadline");
      a.arrival_ms = f.integer("arrival");
      f.finish();
      w.push_back(std::move(a));
    } else if (line.keyword == "task") {
      if (w.empty()) fail(line.number, "task before any workflow");
      TaskSpec t;
      t.task_id = f.str("id");
      for (auto& p : f.list("parents")) t.parents.insert(p);
      t.data_volume = f.integer("data");
      t.image_id = f.str("image");
      t.image_size = f.integer("image_size");
      t.instructions_per_byte = f.rational("lambda");
      t.cpu_request = f.integer("cpu");
      t.mem_request = f.integer("mem");
      t.mem_min = f.integer("mem_min");
      t.duration = f.integer("duration");
      t.deadline = f.integer("deadline");
      t.role = f.wrap([&] { return parse_role(f.str("role")); });
      t.scene_hint = f.str("scene");
      t.pinned_ip = f.opt("pin");
      f.finish();
      w.back().workflow.tasks.push_back(std::move(t));
    } else {
      fail(line.number, "unknown record '" + line.keyword + "'");
    }
  }
  for (const auto& a : w) {
    try {
      validate_workflow(a.workflow);
    } catch (const Error& e) {
      throw Error(e.code(), "workflow " + a.workflow.workflow_id + ": " + e.what());
    }
  }
  return w;
}

std::string format_workload(const Workload& workload) {
  std::string out{kWorkloadHeader};
  out += '\n';
  for (const auto& a : workload) {
    const auto& wf = a.workflow;
    out += "workflow id=" + wf.workflow_id + " deadline=" + std::to_string(wf.deadline) +
           " arrival=" + std::to_string(a.arrival_ms) + "\n";
    for (const auto& t : wf.tasks) {
      out += "task id=" + t.task_id + " parents=" + join(t.parents) + " data=" + std::to_string(t.data_volume) +
             " image=" + t.image_id + " image_size=" + std::to_string(t.image_size) +
             " lambda=" + t.instructions_per_byte.str() + " cpu=" + std::to_string(t.cpu_request) +
             " mem=" + std::to_string(t.mem_request) + " mem_min=" + std::to_string(t.mem_min) +
             " duration=" + std::to_string(t.duration) + " deadline=" + std::to_string(t.deadline) +
             " role=" + to_string(t.role) + " scene=" + t.scene_hint;
      if (t.pinned_ip) out += " pin=" + *t.pinned_ip;
      out += '\n';
    }
  }
  return out;
}

Workload load_workload(const std::string& path) {
  try {
    return parse_workload(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

const std::string& default_cluster_text() {
  static const std::string text =
      "# kces-cluster v1\n"
      "# 100 Mbps links = 12500000 bytes/s\n"
      "node id=node-1 ip=192.168.0.161 tier=cloud scene=cloud cpu=1000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=\n"
      "node id=node-2 ip=192.168.0.162 tier=cloud scene=cloud cpu=1000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=\n"
      "node id=node-3 ip=192.168.0.163 tier=edge scene=edge-1 cpu=4000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=iot/collect\n"
      "node id=node-4 ip=192.168.0.164 tier=edge scene=edge-1 cpu=4000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=iot/collect\n"
      "node id=node-5 ip=192.168.0.165 tier=edge scene=edge-2 cpu=4000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=iot/collect\n"
      "node id=node-6 ip=192.168.0.166 tier=edge scene=edge-2 cpu=4000 mem=2048 device_bw=12500000 "
      "uplink_bw=12500000 images=iot/collect\n"
      "pair edge-1 cloud\n"
      "pair edge-2 cloud\n";
  return text;
}

Cluster default_cluster() { return parse_cluster(default_cluster_text()); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace kces
