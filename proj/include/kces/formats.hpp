#pragma once

#include <string>
#include <string_view>

#include "kces/model.hpp"

namespace kces {

/// Line-oriented `key=value` text formats; schemas live in docs/formats.md.
/// Parse errors carry the line number and offending field.

Cluster parse_cluster(std::string_view text);
std::string format_cluster(const Cluster& cluster);
Cluster load_cluster(const std::string& path);

Workload parse_workload(std::string_view text);
std::string format_workload(const Workload& workload);
Workload load_workload(const std::string& path);

/// Two 1-core/2 GiB cloud nodes and four 4-core/2 GiB edge nodes in scenes
/// edge-1 and edge-2 on a 100 Mbps network. The master node carries no load
/// and is not listed.
const std::string& default_cluster_text();
Cluster default_cluster();

/// Throws Error{IoError} naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace kces
