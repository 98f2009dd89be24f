#include "fedlock/analysis.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace fedlock {

namespace {
const std::vector<int> kEmpty;
}

AnalysisContext::AnalysisContext(const TaskSet& ts, const Assignment& asg,
                                 AnalysisMode mode, std::size_t path_cap)
    : ts_(&ts), asg_(&asg), mode_(mode), path_cap_(path_cap) {
  for (const auto& t : ts.tasks) by_priority_.push_back(t.id);
  std::sort(by_priority_.begin(), by_priority_.end(), [&](int a, int b) {
    return ts.task_by_id(a)->priority > ts.task_by_id(b)->priority;
  });

  for (const auto& c : asg.clusters) cluster_procs_[c.task] = c.processors;

  for (int q : ts.resource_ids) {
    global_[q] = ts.is_global(q);
    ceiling_base_[q] = ts.ceiling_base(q);
  }
  for (const auto& [q, proc] : asg.placement) globals_on_proc_[proc].push_back(q);
  for (auto& [proc, lst] : globals_on_proc_) std::sort(lst.begin(), lst.end());

  for (const auto& c : asg.clusters) {
    std::vector<int> hosted;
    for (int p : c.processors) {
      auto it = globals_on_proc_.find(p);
      if (it != globals_on_proc_.end())
        hosted.insert(hosted.end(), it->second.begin(), it->second.end());
    }
    std::sort(hosted.begin(), hosted.end());
    globals_on_cluster_[c.task] = std::move(hosted);
  }

  for (const auto& t : ts.tasks) {
    for (const auto& [proc, lst] : globals_on_proc_) {
      time_ns sum = 0;
      for (int q : lst)
        sum += static_cast<time_ns>(t.request_count(q)) * t.cs_length(q);
      agent_demand_[{t.id, proc}] = sum;
    }
  }
}

int AnalysisContext::cluster_size(int task) const {
  auto it = cluster_procs_.find(task);
  return it == cluster_procs_.end() ? 0 : static_cast<int>(it->second.size());
}

const std::vector<int>& AnalysisContext::cluster_processors(int task) const {
  auto it = cluster_procs_.find(task);
  return it == cluster_procs_.end() ? kEmpty : it->second;
}

bool AnalysisContext::is_global(int resource) const {
  auto it = global_.find(resource);
  return it != global_.end() && it->second;
}

int AnalysisContext::host_of(int resource) const { return asg_->host_of(resource); }

const std::vector<int>& AnalysisContext::globals_on(int processor) const {
  auto it = globals_on_proc_.find(processor);
  return it == globals_on_proc_.end() ? kEmpty : it->second;
}

const std::vector<int>& AnalysisContext::colocated_with(int resource) const {
  return globals_on(host_of(resource));
}

const std::vector<int>& AnalysisContext::globals_on_cluster(int task) const {
  auto it = globals_on_cluster_.find(task);
  return it == globals_on_cluster_.end() ? kEmpty : it->second;
}

int AnalysisContext::ceiling_base(int resource) const {
  auto it = ceiling_base_.find(resource);
  return it == ceiling_base_.end() ? INT_MIN : it->second;
}

time_ns AnalysisContext::response_estimate(int task) const {
  auto it = response_bound_.find(task);
  if (it != response_bound_.end()) return it->second;
  return ts_->task_by_id(task)->deadline;
}

void AnalysisContext::set_response_bound(int task, time_ns bound) {
  response_bound_[task] = bound;
}

void AnalysisContext::clear_response_bounds() { response_bound_.clear(); }

const Task& AnalysisContext::task(int id) const {
  const Task* t = ts_->task_by_id(id);
  if (!t) throw std::out_of_range("unknown task id");
  return *t;
}

time_ns AnalysisContext::agent_demand(int task, int processor) const {
  auto it = agent_demand_.find({task, processor});
  return it == agent_demand_.end() ? 0 : it->second;
}

std::int64_t job_count(const AnalysisContext& ctx, int task, time_ns interval) {
  const Task& t = ctx.task(task);
  return ceil_div(interval + ctx.response_estimate(task), t.period);
}

time_ns higher_priority_demand(const AnalysisContext& ctx, int task, int resource,
                               time_ns interval) {
  const int host = ctx.host_of(resource);
  const int prio = ctx.task(task).priority;
  time_ns sum = 0;
  for (const auto& h : ctx.task_set().tasks) {
    if (h.priority <= prio) continue;
    time_ns demand = ctx.agent_demand(h.id, host);
    if (demand > 0) sum += job_count(ctx, h.id, interval) * demand;
  }
  return sum;
}

time_ns lower_priority_blocking(const AnalysisContext& ctx, int task,
                                int resource) {
  const int prio = ctx.task(task).priority;
  time_ns best = 0;
  for (const auto& j : ctx.task_set().tasks) {
    if (j.priority >= prio) continue;
    for (int u : ctx.colocated_with(resource)) {
      if (j.request_count(u) <= 0) continue;
      if (ctx.ceiling_base(u) < prio) continue;  // ceiling too low to gate us
      best = std::max(best, j.cs_length(u));
    }
  }
  return best;
}

CountVec zero_counts(const TaskSet& ts) {
  return CountVec(ts.resource_ids.size(), 0);
}

CountVec full_counts(const TaskSet& ts, const Task& task) {
  CountVec counts(ts.resource_ids.size(), 0);
  for (std::size_t i = 0; i < ts.resource_ids.size(); ++i)
    counts[i] = task.request_count(ts.resource_ids[i]);
  return counts;
}

int resource_index(const TaskSet& ts, int resource) {
  auto it = std::lower_bound(ts.resource_ids.begin(), ts.resource_ids.end(),
                             resource);
  if (it == ts.resource_ids.end() || *it != resource)
    throw std::out_of_range("unknown resource id");
  return static_cast<int>(it - ts.resource_ids.begin());
}

namespace {

int count_of(const AnalysisContext& ctx, const CountVec& counts, int resource) {
  return counts[static_cast<std::size_t>(
      resource_index(ctx.task_set(), resource))];
}

// Least solution of W = constant + higher_priority_demand(W); the constant
// part carries the request itself, the sibling surplus on co-hosted globals
// and the single lower-priority hold. w_counts gives the on-path requests
// subtracted from the surplus.
std::optional<time_ns> request_bound_impl(const AnalysisContext& ctx, int task,
                                          int resource,
                                          const CountVec& w_counts) {
  const Task& t = ctx.task(task);
  time_ns base = t.cs_length(resource);
  for (int u : ctx.colocated_with(resource)) {
    time_ns surplus = t.request_count(u) - count_of(ctx, w_counts, u);
    base += std::max<time_ns>(0, surplus) * t.cs_length(u);
  }
  base += lower_priority_blocking(ctx, task, resource);

  time_ns w = base;
  while (w <= t.deadline) {
    time_ns next = base + higher_priority_demand(ctx, task, resource, w);
    if (next == w) return w;
    w = next;
  }
  return std::nullopt;
}

// Per-processor inter-task blocking under per-request accounting: each
// on-path request to a co-hosted global pays one lower-priority hold plus the
// higher-priority demand within the request's response bound. multiplier
// gives the on-path request counts, w_counts the counts used inside the
// request bound (they differ only in envelope mode).
std::optional<std::vector<time_ns>> epsilon_by_proc(const AnalysisContext& ctx,
                                                    int task,
                                                    const CountVec& multiplier,
                                                    const CountVec& w_counts) {
  std::vector<time_ns> eps(static_cast<std::size_t>(ctx.task_set().m), 0);
  for (const auto& [q, host] : ctx.assignment().placement) {
    int n_path = count_of(ctx, multiplier, q);
    if (n_path <= 0) continue;
    auto w = request_bound_impl(ctx, task, q, w_counts);
    if (!w) return std::nullopt;
    time_ns per_request = lower_priority_blocking(ctx, task, q) +
                          higher_priority_demand(ctx, task, q, *w);
    if (host >= 0 && host < ctx.task_set().m)
      eps[static_cast<std::size_t>(host)] += per_request * n_path;
  }
  return eps;
}

// Total-workload accounting of other tasks' agent time on one processor.
time_ns zeta_on_proc(const AnalysisContext& ctx, int task, int processor,
                     time_ns response_candidate) {
  time_ns sum = 0;
  for (const auto& j : ctx.task_set().tasks) {
    if (j.id == task) continue;
    time_ns demand = ctx.agent_demand(j.id, processor);
    if (demand > 0) sum += job_count(ctx, j.id, response_candidate) * demand;
  }
  return sum;
}

}  // namespace

std::optional<time_ns> request_response_bound(const AnalysisContext& ctx,
                                              int task, int resource,
                                              const CountVec& path_counts) {
  return request_bound_impl(ctx, task, resource, path_counts);
}

std::optional<time_ns> inter_task_blocking(const AnalysisContext& ctx, int task,
                                           const CountVec& path_counts,
                                           time_ns response_candidate) {
  auto eps = epsilon_by_proc(ctx, task, path_counts, path_counts);
  if (!eps) return std::nullopt;
  time_ns sum = 0;
  for (int k = 0; k < ctx.task_set().m; ++k) {
    if ((*eps)[static_cast<std::size_t>(k)] == 0) continue;
    sum += std::min((*eps)[static_cast<std::size_t>(k)],
                    zeta_on_proc(ctx, task, k, response_candidate));
  }
  return sum;
}

time_ns intra_task_blocking(const AnalysisContext& ctx, int task,
                            const CountVec& path_counts) {
  const Task& t = ctx.task(task);
  time_ns sum = 0;
  for (int q : ctx.task_set().resource_ids) {
    if (ctx.is_global(q)) continue;
    int on_path = count_of(ctx, path_counts, q);
    if (on_path <= 0) continue;
    sum += static_cast<time_ns>(t.request_count(q) - on_path) * t.cs_length(q);
  }
  for (int k = 0; k < ctx.task_set().m; ++k) {
    const auto& hosted = ctx.globals_on(k);
    if (hosted.empty()) continue;
    bool requests_here = false;
    for (int q : hosted)
      if (count_of(ctx, path_counts, q) > 0) {
        requests_here = true;
        break;
      }
    if (!requests_here) continue;
    for (int q : hosted)
      sum += static_cast<time_ns>(t.request_count(q) -
                                  count_of(ctx, path_counts, q)) *
             t.cs_length(q);
  }
  return sum;
}

time_ns intra_interference(const AnalysisContext& ctx, int task, time_ns length,
                           const CountVec& path_counts) {
  const Task& t = ctx.task(task);
  time_ns cs_on_path = 0;
  for (std::size_t i = 0; i < ctx.task_set().resource_ids.size(); ++i)
    cs_on_path += static_cast<time_ns>(path_counts[i]) *
                  t.cs_length(ctx.task_set().resource_ids[i]);
  time_ns off_path_noncritical = t.noncritical_wcet() - (length - cs_on_path);
  time_ns local_surplus = 0;
  for (int q : ctx.task_set().resource_ids) {
    if (ctx.is_global(q)) continue;
    local_surplus += static_cast<time_ns>(t.request_count(q) -
                                          count_of(ctx, path_counts, q)) *
                     t.cs_length(q);
  }
  return off_path_noncritical + local_surplus;
}

time_ns agent_interference(const AnalysisContext& ctx, int task,
                           const CountVec& path_counts,
                           time_ns response_candidate) {
  const Task& t = ctx.task(task);
  time_ns sum = 0;
  for (int p : ctx.cluster_processors(task))
    sum += zeta_on_proc(ctx, task, p, response_candidate);
  for (int q : ctx.globals_on_cluster(task))
    sum += static_cast<time_ns>(t.request_count(q) -
                                count_of(ctx, path_counts, q)) *
           t.cs_length(q);
  return sum;
}

PathBreakdown path_response_bound(const AnalysisContext& ctx, int task,
                                  time_ns length, const CountVec& path_counts,
                                  const std::vector<int>& path_vertices) {
  const Task& t = ctx.task(task);
  const int m_i = std::max(1, ctx.cluster_size(task));

  PathBreakdown bd;
  bd.path_vertices = path_vertices;
  bd.length = length;
  bd.intra_blocking = intra_task_blocking(ctx, task, path_counts);
  bd.intra_interference = intra_interference(ctx, task, length, path_counts);

  auto eps = epsilon_by_proc(ctx, task, path_counts, path_counts);
  if (!eps) {  // some request bound diverged: path unschedulable
    bd.bound = t.deadline + 1;
    bd.converged = false;
    return bd;
  }

  time_ns r = length + bd.intra_blocking;
  while (r <= t.deadline) {
    time_ns inter = 0;
    for (int k = 0; k < ctx.task_set().m; ++k) {
      time_ns e = (*eps)[static_cast<std::size_t>(k)];
      if (e > 0) inter += std::min(e, zeta_on_proc(ctx, task, k, r));
    }
    time_ns agents = agent_interference(ctx, task, path_counts, r);
    time_ns next = length + inter + bd.intra_blocking +
                   ceil_div(bd.intra_interference + agents, m_i);
    if (next == r) {
      bd.inter_blocking = inter;
      bd.agent_interference = agents;
      bd.bound = r;
      bd.converged = true;
      return bd;
    }
    r = next;
  }
  bd.bound = r;
  bd.converged = false;
  return bd;
}

namespace {

// Envelope evaluation: the recurrence with every additive term at its own
// worst-case request-count vector, path length replaced by the longest path.
TaskAnalysis envelope_bound(const AnalysisContext& ctx, int task) {
  const Task& t = ctx.task(task);
  const TaskSet& ts = ctx.task_set();
  const int m_i = std::max(1, ctx.cluster_size(task));

  TaskAnalysis result;
  result.task = task;
  result.mode_used = AnalysisMode::envelope;
  result.profiles_evaluated = 1;

  const time_ns lstar = longest_path_length(t);
  const CountVec zeros = zero_counts(ts);
  const CountVec full = full_counts(ts, t);

  // Intra-task blocking, maximized per term: a local resource blocks most
  // when the path makes exactly one of its requests; a processor's hosted
  // surplus is largest with a single request on its cheapest resource.
  time_ns b_env = 0;
  for (int q : ts.resource_ids) {
    if (ctx.is_global(q)) continue;
    int n = t.request_count(q);
    if (n >= 1) b_env += static_cast<time_ns>(n - 1) * t.cs_length(q);
  }
  for (int k = 0; k < ts.m; ++k) {
    const auto& hosted = ctx.globals_on(k);
    time_ns total = 0;
    time_ns cheapest = -1;
    for (int q : hosted) {
      int n = t.request_count(q);
      if (n <= 0) continue;
      total += static_cast<time_ns>(n) * t.cs_length(q);
      if (cheapest < 0 || t.cs_length(q) < cheapest) cheapest = t.cs_length(q);
    }
    if (cheapest >= 0) b_env += total - cheapest;
  }

  // Off-path work is bounded by the whole task minus the longest path.
  const time_ns intra_env = t.total_wcet() - lstar;

  auto eps = epsilon_by_proc(ctx, task, full, zeros);
  PathBreakdown bd;
  bd.length = lstar;
  bd.intra_blocking = b_env;
  bd.intra_interference = intra_env;
  if (!eps) {
    bd.bound = t.deadline + 1;
    bd.converged = false;
    result.binding = bd;
    result.wcrt = bd.bound;
    result.schedulable = false;
    return result;
  }

  time_ns r = lstar + b_env;
  while (r <= t.deadline) {
    time_ns inter = 0;
    for (int k = 0; k < ts.m; ++k) {
      time_ns e = (*eps)[static_cast<std::size_t>(k)];
      if (e > 0) inter += std::min(e, zeta_on_proc(ctx, task, k, r));
    }
    time_ns agents = agent_interference(ctx, task, zeros, r);
    time_ns next = lstar + inter + b_env + ceil_div(intra_env + agents, m_i);
    if (next == r) {
      bd.inter_blocking = inter;
      bd.agent_interference = agents;
      bd.bound = r;
      bd.converged = true;
      break;
    }
    r = next;
  }
  if (!bd.converged) bd.bound = r;
  result.binding = bd;
  result.wcrt = bd.bound;
  result.schedulable = bd.converged && bd.bound <= t.deadline;
  return result;
}

}  // namespace

TaskAnalysis task_wcrt(const AnalysisContext& ctx, int task) {
  const Task& t = ctx.task(task);
  if (ctx.mode() == AnalysisMode::envelope) return envelope_bound(ctx, task);

  // Group paths by request-count vector: within a group only the longest
  // path can bind, because raising the length while the counts stay fixed
  // adds more to the base term than it removes from the interference term.
  struct Group {
    time_ns length = -1;
    std::vector<int> vertices;
  };
  std::map<std::vector<int>, Group> groups;
  bool enumerated = for_each_path_profile(
      t, ctx.path_cap(),
      [&](time_ns length, const std::vector<int>& used,
          const std::vector<int>& counts, const std::vector<int>& vertices) {
        (void)used;
        Group& g = groups[counts];
        if (length > g.length) {
          g.length = length;
          g.vertices = vertices;
        }
      });
  if (!enumerated) return envelope_bound(ctx, task);

  // The used-resource key order is fixed per task; recover it once.
  std::vector<int> used;
  {
    std::vector<int> tmp;
    for (const auto& [q, len] : t.cs_lengths) {
      (void)len;
      tmp.push_back(q);
    }
    for (const auto& v : t.vertices)
      for (const auto& [q, n] : v.demands) {
        (void)n;
        tmp.push_back(q);
      }
    std::sort(tmp.begin(), tmp.end());
    tmp.erase(std::unique(tmp.begin(), tmp.end()), tmp.end());
    used = std::move(tmp);
  }

  TaskAnalysis result;
  result.task = task;
  result.mode_used = AnalysisMode::enumerate_paths;
  result.profiles_evaluated = groups.size();
  result.schedulable = true;

  for (const auto& [counts, group] : groups) {
    CountVec dense = zero_counts(ctx.task_set());
    for (std::size_t i = 0; i < used.size(); ++i)
      dense[static_cast<std::size_t>(resource_index(ctx.task_set(), used[i]))] =
          counts[i];
    PathBreakdown bd =
        path_response_bound(ctx, task, group.length, dense, group.vertices);
    if (!bd.converged) {
      result.binding = bd;
      result.wcrt = bd.bound;
      result.schedulable = false;
      return result;
    }
    if (bd.bound > result.wcrt) {
      result.wcrt = bd.bound;
      result.binding = bd;
    }
  }
  if (groups.empty()) {  // no vertices: degenerate, nothing to run
    result.schedulable = true;
    result.wcrt = 0;
  }
  result.schedulable = result.schedulable && result.wcrt <= t.deadline;
  return result;
}

std::optional<TaskAnalysis> task_wcrt_joint_enumeration(
    const AnalysisContext& ctx, int task, std::uint64_t max_combinations) {
  const Task& t = ctx.task(task);
  const TaskSet& ts = ctx.task_set();

  std::vector<int> used;
  std::vector<int> limits;
  std::uint64_t combos = 1;
  for (int q : ts.resource_ids) {
    int n = t.request_count(q);
    if (n <= 0) continue;
    used.push_back(q);
    limits.push_back(n);
    combos *= static_cast<std::uint64_t>(n) + 1;
    if (combos > max_combinations) return std::nullopt;
  }

  const time_ns lstar = longest_path_length(t);
  TaskAnalysis result;
  result.task = task;
  result.mode_used = AnalysisMode::enumerate_paths;
  result.schedulable = true;

  std::vector<int> odo(used.size(), 0);
  CountVec dense = zero_counts(ts);
  while (true) {
    for (std::size_t i = 0; i < used.size(); ++i)
      dense[static_cast<std::size_t>(resource_index(ts, used[i]))] = odo[i];
    PathBreakdown bd = path_response_bound(ctx, task, lstar, dense);
    ++result.profiles_evaluated;
    if (!bd.converged) {
      result.binding = bd;
      result.wcrt = bd.bound;
      result.schedulable = false;
      return result;
    }
    if (bd.bound > result.wcrt) {
      result.wcrt = bd.bound;
      result.binding = bd;
    }
    std::size_t d = 0;
    for (; d < odo.size(); ++d) {
      if (++odo[d] <= limits[d]) break;
      odo[d] = 0;
    }
    if (d == odo.size()) break;
  }
  result.schedulable = result.wcrt <= t.deadline;
  return result;
}

WcrtReport analyze_task_set(AnalysisContext& ctx) {
  ctx.clear_response_bounds();
  WcrtReport report;
  report.schedulable = true;

  // First pass in decreasing priority order; deadlines stand in for tasks
  // not yet analyzed.
  std::vector<TaskAnalysis> first;
  for (int id : ctx.task_ids_by_priority()) {
    TaskAnalysis e = task_wcrt(ctx, id);
    ctx.set_response_bound(id, e.wcrt);
    report.schedulable = report.schedulable && e.schedulable;
    first.push_back(std::move(e));
  }
  if (!report.schedulable) {
    report.tasks = std::move(first);
    return report;
  }

  // Re-verification with every computed bound in the table; bounds can only
  // tighten because the stand-ins were no smaller.
  for (int id : ctx.task_ids_by_priority()) {
    TaskAnalysis e = task_wcrt(ctx, id);
    report.schedulable = report.schedulable && e.schedulable;
    report.tasks.push_back(std::move(e));
  }
  return report;
}

}  // namespace fedlock
