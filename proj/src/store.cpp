#include "kces/store.hpp"

#include <limits>

#include "kces/error.hpp"

namespace kces {

void TaskStore::put(const TaskRecord& rec) {
  auto [it, inserted] = records_.insert_or_assign(Key{rec.workflow_id, rec.task_id, rec.incarnation}, rec);
  (void)it;
  if (inserted) ++puts_;
}

std::optional<TaskRecord> TaskStore::get(const std::string& workflow_id, const std::string& task_id,
                                         int incarnation) const {
  auto it = records_.find(Key{workflow_id, task_id, incarnation});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::optional<TaskRecord> TaskStore::current(const std::string& workflow_id, const std::string& task_id) const {
  // Keys sort by incarnation last, so the greatest key below (wf, task, +inf)
  // is the newest incarnation.
  auto it = records_.upper_bound(Key{workflow_id, task_id, std::numeric_limits<int>::max()});
  if (it == records_.begin()) return std::nullopt;
  --it;
  if (std::get<0>(it->first) != workflow_id || std::get<1>(it->first) != task_id) return std::nullopt;
  return it->second;
}

TaskRecord& TaskStore::current_mut(const std::string& workflow_id, const std::string& task_id) {
  auto it = records_.upper_bound(Key{workflow_id, task_id, std::numeric_limits<int>::max()});
  if (it != records_.begin()) {
    --it;
    if (std::get<0>(it->first) == workflow_id && std::get<1>(it->first) == task_id) return it->second;
  }
  throw Error(ErrorCode::NotFound, "no record for " + workflow_id + "/" + task_id);
}

bool TaskStore::erase(const std::string& workflow_id, const std::string& task_id, int incarnation) {
  if (records_.erase(Key{workflow_id, task_id, incarnation}) == 0) return false;
  ++deletes_;
  return true;
}

std::vector<TaskRecord> TaskStore::pending_on_node(const Label& label, Millis start_ms, Millis end_ms) const {
  std::vector<TaskRecord> out;
  for (const auto& [key, rec] : records_) {
    if (rec.alive || rec.label != label) continue;
    if (rec.start_ms < start_ms || rec.start_ms > end_ms) continue;
    out.push_back(rec);
  }
  return out;
}

void TaskStore::update_label(const std::string& workflow_id, const std::string& task_id, const Label& label,
                             const std::optional<std::string>& image_address) {
  auto& rec = current_mut(workflow_id, task_id);
  rec.label = label;
  if (image_address) rec.image_address = *image_address;
}

std::vector<TaskRecord> TaskStore::all() const {
  std::vector<TaskRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, rec] : records_) out.push_back(rec);
  return out;
}

}  // namespace kces
