#include "fedlock/partitioning.hpp"

#include <algorithm>
#include <numeric>

namespace fedlock {

std::optional<int> initial_core_count(const Task& task) {
  const time_ns lstar = longest_path_length(task);
  const time_ns c = task.total_wcet();
  if (lstar >= task.deadline) return std::nullopt;
  time_ns count = ceil_div(c - lstar, task.deadline - lstar);
  return static_cast<int>(std::max<time_ns>(1, count));
}

double resource_utilization(const TaskSet& ts, int resource) {
  double sum = 0;
  for (const auto& t : ts.tasks) {
    int n = t.request_count(resource);
    if (n > 0)
      sum += static_cast<double>(n) * static_cast<double>(t.cs_length(resource)) /
             static_cast<double>(t.period);
  }
  return sum;
}

WfdResult wfd_resources(const TaskSet& ts, const std::vector<Cluster>& clusters) {
  WfdResult result;

  std::vector<int> globals;
  for (int q : ts.resource_ids)
    if (ts.is_global(q)) globals.push_back(q);
  std::sort(globals.begin(), globals.end(), [&](int a, int b) {
    double ua = resource_utilization(ts, a);
    double ub = resource_utilization(ts, b);
    if (ua != ub) return ua > ub;
    return a < b;
  });

  std::vector<double> cluster_util(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const Task* t = ts.task_by_id(clusters[c].task);
    cluster_util[c] = t ? t->utilization() : 0.0;
  }
  std::map<int, double> proc_util;  // resource utilization per processor

  for (int q : globals) {
    double uq = resource_utilization(ts, q);
    int best = -1;
    double best_slack = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      double slack =
          static_cast<double>(clusters[c].processors.size()) - cluster_util[c];
      if (best < 0 || slack > best_slack) {
        best = static_cast<int>(c);
        best_slack = slack;
      }
    }
    if (best < 0 || cluster_util[static_cast<std::size_t>(best)] + uq >
                        static_cast<double>(
                            clusters[static_cast<std::size_t>(best)].processors.size())) {
      result.feasible = false;
      result.failed_resource = q;
      return result;
    }
    const auto& procs = clusters[static_cast<std::size_t>(best)].processors;
    int target = procs.front();
    for (int p : procs)
      if (proc_util[p] < proc_util[target]) target = p;
    result.placement[q] = target;
    proc_util[target] += uq;
    cluster_util[static_cast<std::size_t>(best)] += uq;
  }
  result.feasible = true;
  return result;
}

std::string mode_name(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::dpcp_ep: return "EP";
    case PartitionMode::dpcp_en: return "EN";
    case PartitionMode::fed_fp: return "FED-FP";
  }
  return "?";
}

TaskSet strip_resources(const TaskSet& ts) {
  TaskSet out = ts;
  for (auto& t : out.tasks) {
    t.cs_lengths.clear();
    for (auto& v : t.vertices) v.demands.clear();
  }
  return out;
}

namespace {

// Processors 0..m-1 handed to clusters in ascending order, tasks visited in
// decreasing priority order. Numbering is cosmetic: placement decisions only
// depend on cluster membership.
std::vector<Cluster> build_clusters(const std::vector<int>& by_priority,
                                    const std::map<int, int>& cores) {
  std::vector<Cluster> clusters;
  int next = 0;
  for (int id : by_priority) {
    Cluster c;
    c.task = id;
    for (int i = 0; i < cores.at(id); ++i) c.processors.push_back(next++);
    clusters.push_back(std::move(c));
  }
  return clusters;
}

}  // namespace

PartitionOutcome partition_and_analyze(const TaskSet& input, PartitionMode mode,
                                       std::size_t path_cap) {
  PartitionOutcome out;

  const TaskSet stripped =
      mode == PartitionMode::fed_fp ? strip_resources(input) : TaskSet{};
  const TaskSet& ts = mode == PartitionMode::fed_fp ? stripped : input;

  if (!validate_task_set(ts).empty()) {
    out.failed_stage = PartitionOutcome::Stage::validation;
    return out;
  }

  const AnalysisMode amode = mode == PartitionMode::dpcp_en
                                 ? AnalysisMode::envelope
                                 : AnalysisMode::enumerate_paths;

  std::vector<int> by_priority;
  for (const auto& t : ts.tasks) by_priority.push_back(t.id);
  std::sort(by_priority.begin(), by_priority.end(), [&](int a, int b) {
    return ts.task_by_id(a)->priority > ts.task_by_id(b)->priority;
  });

  std::map<int, int> cores;
  int total = 0;
  for (int id : by_priority) {
    auto need = initial_core_count(*ts.task_by_id(id));
    if (!need || total + *need > ts.m) {
      out.failed_stage = PartitionOutcome::Stage::initial_assignment;
      out.failed_task = id;
      return out;
    }
    cores[id] = *need;
    total += *need;
  }

  while (true) {
    ++out.rounds;
    auto clusters = build_clusters(by_priority, cores);
    auto wfd = wfd_resources(ts, clusters);
    if (!wfd.feasible) {
      out.failed_stage = PartitionOutcome::Stage::resource_placement;
      out.failed_task = wfd.failed_resource;
      return out;
    }
    Assignment asg;
    asg.clusters = clusters;
    asg.placement = wfd.placement;

    AnalysisContext ctx(ts, asg, amode, path_cap);
    int failing = -1;
    for (int id : by_priority) {
      TaskAnalysis e = task_wcrt(ctx, id);
      ctx.set_response_bound(id, e.wcrt);
      if (!e.schedulable) {
        failing = id;
        break;
      }
    }
    if (failing < 0) {
      // Converged: re-verify with all bounds computed, report those values.
      out.schedulable = true;
      out.assignment = asg;
      AnalysisContext final_ctx(ts, asg, amode, path_cap);
      out.report = analyze_task_set(final_ctx);
      out.schedulable = out.report.schedulable;
      return out;
    }
    if (total >= ts.m) {
      out.failed_stage = PartitionOutcome::Stage::analysis;
      out.failed_task = failing;
      out.assignment = asg;
      return out;
    }
    // One more processor for the first failing task; the resource placement
    // is rebuilt from scratch next round.
    ++cores[failing];
    ++total;
  }
}

}  // namespace fedlock
