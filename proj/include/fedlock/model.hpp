#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedlock/time.hpp"

namespace fedlock {

/// One node of a task's DAG: worst-case execution time plus how many times it
/// requests each shared resource. Critical-section lengths live on the owning
/// task (one length per task/resource pair), so a vertex's critical-section
/// budget is demands[q] * task.cs_length(q).
struct Vertex {
  time_ns wcet = 0;
  std::map<int, int> demands;  // resource id -> request count

  int demand(int resource) const {
    auto it = demands.find(resource);
    return it == demands.end() ? 0 : it->second;
  }
};

/// A sporadic parallel task: a DAG of vertices with a unique base priority
/// (larger value = higher priority), a period and a constrained deadline.
struct Task {
  int id = 0;
  int priority = 0;
  time_ns period = 0;
  time_ns deadline = 0;
  std::vector<Vertex> vertices;
  std::vector<std::pair<int, int>> edges;  // (pred, succ) vertex indices
  std::map<int, time_ns> cs_lengths;       // resource id -> critical-section length

  time_ns cs_length(int resource) const {
    auto it = cs_lengths.find(resource);
    return it == cs_lengths.end() ? 0 : it->second;
  }

  /// Total worst-case execution time over all vertices.
  time_ns total_wcet() const;

  /// Total request count of this task for one resource.
  int request_count(int resource) const;

  /// Critical-section time of one vertex: sum of demands times lengths.
  time_ns vertex_cs_time(std::size_t v) const;

  /// Non-critical WCET of one vertex (wcet minus its critical sections).
  time_ns vertex_noncritical(std::size_t v) const {
    return vertices[v].wcet - vertex_cs_time(v);
  }

  /// Non-critical WCET of the whole task.
  time_ns noncritical_wcet() const;

  bool uses(int resource) const { return request_count(resource) > 0; }

  double utilization() const {
    return static_cast<double>(total_wcet()) / static_cast<double>(period);
  }

  std::vector<int> head_vertices() const;
  std::vector<int> tail_vertices() const;
  std::vector<std::vector<int>> successor_lists() const;
  std::vector<std::vector<int>> predecessor_lists() const;
};

/// A head-to-tail vertex sequence through a task's DAG.
struct Path {
  std::vector<int> vertices;
  time_ns length = 0;          // sum of vertex WCETs along the path
  std::map<int, int> counts;   // resource id -> requests issued on the path

  int count(int resource) const {
    auto it = counts.find(resource);
    return it == counts.end() ? 0 : it->second;
  }
};

enum class ResourceScope { local, global };

/// Scope classification for one resource under a given task set: global when
/// at least two distinct tasks request it, local otherwise.
struct ResourceSpec {
  int id = 0;
  ResourceScope scope = ResourceScope::local;
  int owner_task = -1;  // the single user for local resources, -1 if unused
};

/// A complete workload: tasks, resource universe and the processor count.
/// Immutable after construction; analysis and simulation never mutate it.
struct TaskSet {
  int m = 0;                       // processors
  std::vector<int> resource_ids;   // resource universe (sorted, unique)
  std::vector<Task> tasks;
  std::map<std::string, std::string> meta;  // provenance (seed tuple etc.)

  const Task* task_by_id(int id) const;

  std::vector<int> users_of(int resource) const;
  ResourceSpec resource_spec(int resource) const;
  bool is_global(int resource) const {
    return resource_spec(resource).scope == ResourceScope::global;
  }

  /// Highest base priority among tasks using the resource; used to build
  /// priority ceilings. INT_MIN when unused.
  int ceiling_base(int resource) const;

  double total_utilization() const;
};

/// Number of head-to-tail paths, saturated at cap+1 so callers can detect
/// overflow without enumerating.
std::size_t count_complete_paths(const Task& task, std::size_t cap);

/// All complete paths when their number is within cap; nullopt signals
/// overflow (the caller falls back to the envelope analysis mode).
std::optional<std::vector<Path>> enumerate_complete_paths(const Task& task,
                                                          std::size_t cap);

/// Streaming variant: invokes fn(length, used_resources, counts, vertices)
/// per complete path without materializing the path list, where counts[i] is
/// the number of requests for used_resources[i]. Returns false on overflow.
bool for_each_path_profile(
    const Task& task, std::size_t cap,
    const std::function<void(time_ns, const std::vector<int>&,
                             const std::vector<int>&, const std::vector<int>&)>& fn);

/// Length of the longest complete path, by topological-order dynamic
/// programming (no enumeration).
time_ns longest_path_length(const Task& task);

/// Requests a path issues for one resource.
int path_request_count(const Path& path, int resource);

struct ValidationIssue {
  int task = -1;   // -1 for set-level issues
  std::string code;
  std::string detail;
};

/// Reports every violated structural invariant: cycles, dangling edges,
/// negative non-critical time, deadline > period, duplicate priorities,
/// per-vertex demand exceeding the vertex WCET. Empty result means valid.
std::vector<ValidationIssue> validate_task_set(const TaskSet& ts);

/// Default bound on path enumeration before switching to envelope mode.
constexpr std::size_t kDefaultPathCap = 100'000;

}  // namespace fedlock
