#pragma once

#include <string>

#include "fedlock/analysis.hpp"
#include "fedlock/assignment.hpp"
#include "fedlock/model.hpp"

namespace fedlock {

/// Task-set document: top-level `m`, `resources` (id plus per-task
/// critical-section length), `tasks` (id, priority, period_ns, deadline_ns,
/// vertices with wcet_ns and demands, edges as [pred, succ] pairs) and an
/// optional `meta` block. Load/store round-trips losslessly and serialization
/// is byte-deterministic.
std::string taskset_to_json(const TaskSet& ts);
TaskSet taskset_from_json(const std::string& text);

std::string assignment_to_json(const Assignment& asg);
Assignment assignment_from_json(const std::string& text);

std::string report_to_json(const WcrtReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace fedlock
