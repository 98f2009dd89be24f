#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedlock/analysis.hpp"
#include "fedlock/assignment.hpp"
#include "fedlock/model.hpp"
#include "fedlock/time.hpp"

namespace fedlock {

enum class ReleaseModel { synchronous_periodic, sporadic_jitter };
enum class ExecModel { always_wcet, uniform_scaled };

struct SimConfig {
  time_ns horizon = 0;  // jobs released strictly before this; all run to completion
  ReleaseModel release = ReleaseModel::synchronous_periodic;
  ExecModel exec = ExecModel::always_wcet;
  std::uint64_t seed = 0;
  double scale_lo = 0.5;    // uniform_scaled draws a per-job factor in [scale_lo, 1]
  double jitter_frac = 0.1; // sporadic adds up to jitter_frac * T per release
};

enum class EventKind {
  release,
  dispatch,
  preempt,
  lock_request,
  lock_grant,
  lock_release,
  agent_start,
  agent_end,
  suspend,
  resume,
  job_finish,
  deadline_miss,
};

const char* event_kind_name(EventKind kind);

struct SimEvent {
  time_ns time = 0;
  EventKind kind = EventKind::release;
  int task = -1;
  int job = -1;
  int vertex = -1;
  int resource = -1;
  int processor = -1;
};

struct JobStat {
  int task = -1;
  int job = -1;
  time_ns release = 0;
  time_ns finish = -1;
};

struct SimTrace {
  std::vector<SimEvent> events;
  std::vector<JobStat> jobs;
};

/// Deterministic event-driven execution of the locking protocol on the given
/// assignment: local resources lock in place, global requests suspend the
/// vertex and run through an agent on the resource's host processor under the
/// priority-ceiling grant rule. Throws std::invalid_argument on an
/// inconsistent assignment.
SimTrace simulate(const TaskSet& ts, const Assignment& asg, const SimConfig& cfg);

struct TraceViolation {
  std::string what;
  time_ns time = 0;
  int task = -1;
  int resource = -1;
};

/// Replays lock grants of global resources against reconstructed processor
/// ceilings; empty means the protocol was respected.
std::vector<TraceViolation> check_priority_ceiling(const SimTrace& trace,
                                                   const TaskSet& ts,
                                                   const Assignment& asg);

/// For every global request, counts the distinct lower-priority agent
/// executions on the target processor overlapping its wait; any count above
/// one is a violation.
std::vector<TraceViolation> check_single_lower_priority_blocking(
    const SimTrace& trace, const TaskSet& ts, const Assignment& asg);

/// Observed job responses against the analytic per-task bounds.
std::vector<TraceViolation> check_response_bounds(const SimTrace& trace,
                                                  const WcrtReport& report,
                                                  const TaskSet& ts);

/// An assignment usable for protocol simulation even when the analysis
/// rejects the set: the partitioned result when schedulable, otherwise
/// initial clusters with a capacity-blind placement.
Assignment simulation_assignment(const TaskSet& ts,
                                 std::size_t path_cap = kDefaultPathCap);

std::string trace_to_ndjson(const SimTrace& trace);
std::string trace_to_csv(const SimTrace& trace);

}  // namespace fedlock
