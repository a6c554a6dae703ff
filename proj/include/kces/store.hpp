#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "kces/model.hpp"

namespace kces {

/// One incarnation of a task as seen by the resource manager. A task that is
/// roamed or offloaded gets a fresh incarnation.
struct TaskRecord {
  std::string workflow_id;
  std::string task_id;
  int incarnation = 0;
  Label label;
  bool alive = false;           // has a pod been created for this incarnation
  Millis start_ms = 0;          // (predicted) start of execution
  Millis lifecycle_end_ms = 0;  // last millisecond of the predicted lifecycle
  Millis deadline_ms = 0;
  Resources request;            // demand reserved by the manager
  Millicores allocated_cpu = 0;
  MiB allocated_mem = 0;
  std::string image_address;

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

/// In-process key/value task store. Single writer, snapshot-consistent.
class TaskStore {
 public:
  using Key = std::tuple<std::string, std::string, int>;

  void put(const TaskRecord& rec);
  std::optional<TaskRecord> get(const std::string& workflow_id, const std::string& task_id, int incarnation) const;
  /// Highest incarnation recorded for the task.
  std::optional<TaskRecord> current(const std::string& workflow_id, const std::string& task_id) const;
  TaskRecord& current_mut(const std::string& workflow_id, const std::string& task_id);
  bool erase(const std::string& workflow_id, const std::string& task_id, int incarnation);

  /// Not-alive records carrying `label` whose start lies in [start_ms, end_ms].
  std::vector<TaskRecord> pending_on_node(const Label& label, Millis start_ms, Millis end_ms) const;

  /// Relabels the current incarnation; replaces the image address only when
  /// one is given. Throws Error{NotFound}.
  void update_label(const std::string& workflow_id, const std::string& task_id, const Label& label,
                    const std::optional<std::string>& image_address = std::nullopt);

  std::vector<TaskRecord> all() const;
  std::size_t size() const { return records_.size(); }
  std::size_t put_count() const { return puts_; }
  std::size_t delete_count() const { return deletes_; }

 private:
  std::map<Key, TaskRecord> records_;
  std::size_t puts_ = 0;
  std::size_t deletes_ = 0;
};

}  // namespace kces
