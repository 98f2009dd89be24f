#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedlock/assignment.hpp"
#include "fedlock/model.hpp"
#include "fedlock/time.hpp"

namespace fedlock {

/// EP enumerates complete paths (exact per-path request counts); EN evaluates
/// a single envelope in which every additive term takes its worst-case
/// request-count vector. EP falls back to the envelope per task when the path
/// count exceeds the cap.
enum class AnalysisMode { enumerate_paths, envelope };

/// Per-path (or envelope) term decomposition of the response-time recurrence.
struct PathBreakdown {
  std::vector<int> path_vertices;  // empty for envelope evaluations
  time_ns length = 0;
  time_ns inter_blocking = 0;      // B
  time_ns intra_blocking = 0;      // b
  time_ns intra_interference = 0;  // I^intra
  time_ns agent_interference = 0;  // I^agent
  time_ns bound = 0;               // r
  bool converged = false;
};

struct TaskAnalysis {
  int task = -1;
  time_ns wcrt = 0;
  bool schedulable = false;
  AnalysisMode mode_used = AnalysisMode::enumerate_paths;
  PathBreakdown binding;           // the breakdown that determined the bound
  std::size_t profiles_evaluated = 0;
};

struct WcrtReport {
  bool schedulable = false;
  std::vector<TaskAnalysis> tasks;

  const TaskAnalysis* entry(int task) const {
    for (const auto& e : tasks)
      if (e.task == task) return &e;
    return nullptr;
  }
};

/// Read-only analysis state for one (task set, assignment) pair. Response
/// bounds of already-analyzed tasks feed the job-count function; deadlines
/// stand in for tasks not yet analyzed. Effective agent priorities are a tier
/// above every base priority, so ceiling comparisons reduce to base
/// priorities; no numeric offset is materialized.
class AnalysisContext {
 public:
  AnalysisContext(const TaskSet& ts, const Assignment& asg, AnalysisMode mode,
                  std::size_t path_cap = kDefaultPathCap);
  // The context keeps references; temporaries would dangle.
  AnalysisContext(TaskSet&&, const Assignment&, AnalysisMode,
                  std::size_t = kDefaultPathCap) = delete;
  AnalysisContext(const TaskSet&, Assignment&&, AnalysisMode,
                  std::size_t = kDefaultPathCap) = delete;

  const TaskSet& task_set() const { return *ts_; }
  const Assignment& assignment() const { return *asg_; }
  AnalysisMode mode() const { return mode_; }
  std::size_t path_cap() const { return path_cap_; }

  int cluster_size(int task) const;
  const std::vector<int>& cluster_processors(int task) const;
  bool is_global(int resource) const;
  int host_of(int resource) const;
  /// Global resources placed on one processor.
  const std::vector<int>& globals_on(int processor) const;
  /// Global resources placed on the same processor as a resource.
  const std::vector<int>& colocated_with(int resource) const;
  /// Global resources hosted on a task's cluster processors.
  const std::vector<int>& globals_on_cluster(int task) const;
  int ceiling_base(int resource) const;

  /// Response-time estimate used by the job-count function: the computed
  /// bound when available, the deadline otherwise.
  time_ns response_estimate(int task) const;
  void set_response_bound(int task, time_ns bound);
  void clear_response_bounds();

  const Task& task(int id) const;
  const std::vector<int>& task_ids_by_priority() const { return by_priority_; }

  /// Sum over co-hosted globals of N_{j,q} * L_{j,q} for task j, processor k.
  time_ns agent_demand(int task, int processor) const;

 private:
  const TaskSet* ts_;
  const Assignment* asg_;
  AnalysisMode mode_;
  std::size_t path_cap_;
  std::vector<int> by_priority_;  // task ids, decreasing priority
  std::map<int, std::vector<int>> cluster_procs_;
  std::map<int, std::vector<int>> globals_on_proc_;
  std::map<int, std::vector<int>> globals_on_cluster_;
  std::map<int, int> ceiling_base_;
  std::map<int, bool> global_;
  std::map<std::pair<int, int>, time_ns> agent_demand_;  // (task, proc)
  std::map<int, time_ns> response_bound_;
};

/// Maximum number of jobs of a task that overlap an interval.
std::int64_t job_count(const AnalysisContext& ctx, int task, time_ns interval);

/// Cumulative request length of higher-priority tasks on the resources
/// co-hosted with q, within an interval.
time_ns higher_priority_demand(const AnalysisContext& ctx, int task, int resource,
                               time_ns interval);

/// Longest lower-priority critical section that can hold the processor of q
/// against the task: co-hosted resources whose ceiling reaches the task's
/// priority.
time_ns lower_priority_blocking(const AnalysisContext& ctx, int task,
                                int resource);

/// Dense request-count vector over the whole resource universe, indexed by
/// the position of the resource id in TaskSet::resource_ids.
using CountVec = std::vector<int>;

CountVec zero_counts(const TaskSet& ts);
CountVec full_counts(const TaskSet& ts, const Task& task);
int resource_index(const TaskSet& ts, int resource);

/// Bound on the response time of one request from a path with the given
/// on-path counts to a global resource; nullopt when no solution exists
/// within the deadline (the task is then unschedulable).
std::optional<time_ns> request_response_bound(const AnalysisContext& ctx,
                                              int task, int resource,
                                              const CountVec& path_counts);

/// Inter-task blocking: per processor, the cheaper of per-request and
/// total-workload accounting. Monotone in the response candidate.
std::optional<time_ns> inter_task_blocking(const AnalysisContext& ctx, int task,
                                           const CountVec& path_counts,
                                           time_ns response_candidate);

/// Intra-task blocking from siblings off the path: local-resource holders and
/// co-hosted agent work, both gated on the path actually requesting there.
time_ns intra_task_blocking(const AnalysisContext& ctx, int task,
                            const CountVec& path_counts);

/// Intra-task interference: off-path non-critical work plus off-path
/// local-resource requests.
time_ns intra_interference(const AnalysisContext& ctx, int task, time_ns length,
                           const CountVec& path_counts);

/// Agent interference on the task's own cluster: other tasks' requests plus
/// the task's own off-path requests to the hosted globals.
time_ns agent_interference(const AnalysisContext& ctx, int task,
                           const CountVec& path_counts,
                           time_ns response_candidate);

/// Fixed point of r = L + B(r) + b + ceil((I_intra + I_agent(r)) / m_i),
/// iterated upward from L + b; not converged when it crosses the deadline.
PathBreakdown path_response_bound(const AnalysisContext& ctx, int task,
                                  time_ns length, const CountVec& path_counts,
                                  const std::vector<int>& path_vertices = {});

/// Response bound of one task in the context's mode.
TaskAnalysis task_wcrt(const AnalysisContext& ctx, int task);

/// Exhaustive evaluation over all joint request-count vectors (envelope
/// recurrence per vector); refuses when the combination count exceeds the
/// guard. Used to measure envelope pessimism on tiny instances.
std::optional<TaskAnalysis> task_wcrt_joint_enumeration(
    const AnalysisContext& ctx, int task, std::uint64_t max_combinations = 10'000);

/// Full analysis: one pass in decreasing priority order with deadline
/// stand-ins, then a re-verification pass with all computed bounds in place.
WcrtReport analyze_task_set(AnalysisContext& ctx);

}  // namespace fedlock
