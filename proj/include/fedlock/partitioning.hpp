#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedlock/analysis.hpp"
#include "fedlock/assignment.hpp"
#include "fedlock/model.hpp"

namespace fedlock {

/// Processors a task needs before any blocking is considered:
/// ceil((C - L*) / (D - L*)), at least one. nullopt when the longest path
/// already reaches the deadline (trivially infeasible).
std::optional<int> initial_core_count(const Task& task);

/// Long-run processor share of a resource: sum over tasks of N*L/T.
double resource_utilization(const TaskSet& ts, int resource);

struct WfdResult {
  bool feasible = false;
  std::map<int, int> placement;  // resource -> processor
  int failed_resource = -1;
};

/// Worst-fit-decreasing placement of the global resources: highest
/// utilization first, into the cluster with the most slack, onto that
/// cluster's processor with the least resource utilization. Ties break to
/// the lower cluster index / processor id / resource id.
WfdResult wfd_resources(const TaskSet& ts, const std::vector<Cluster>& clusters);

enum class PartitionMode { dpcp_ep, dpcp_en, fed_fp };

std::string mode_name(PartitionMode mode);

struct PartitionOutcome {
  enum class Stage { ok, validation, initial_assignment, resource_placement, analysis };
  bool schedulable = false;
  Stage failed_stage = Stage::ok;
  int failed_task = -1;
  Assignment assignment;
  WcrtReport report;
  int rounds = 0;
};

/// Iterative partitioning: give every task its initial core count, place the
/// globals by worst-fit decreasing, analyze in decreasing priority order; on
/// the first failing task grant it one more processor, discard the placement
/// entirely and restart. fed_fp runs the same loop on a copy with all
/// resource demands removed (pure federated test).
PartitionOutcome partition_and_analyze(const TaskSet& ts, PartitionMode mode,
                                       std::size_t path_cap = kDefaultPathCap);

/// Copy with every resource demand and critical-section length removed.
TaskSet strip_resources(const TaskSet& ts);

}  // namespace fedlock
