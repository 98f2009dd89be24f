#include "fedlock/model.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <set>

namespace fedlock {

time_ns Task::total_wcet() const {
  time_ns sum = 0;
  for (const auto& v : vertices) sum += v.wcet;
  return sum;
}

int Task::request_count(int resource) const {
  int sum = 0;
  for (const auto& v : vertices) sum += v.demand(resource);
  return sum;
}

time_ns Task::vertex_cs_time(std::size_t v) const {
  time_ns sum = 0;
  for (const auto& [q, n] : vertices[v].demands) sum += n * cs_length(q);
  return sum;
}

time_ns Task::noncritical_wcet() const {
  time_ns sum = 0;
  for (std::size_t v = 0; v < vertices.size(); ++v) sum += vertex_noncritical(v);
  return sum;
}

std::vector<std::vector<int>> Task::successor_lists() const {
  std::vector<std::vector<int>> succ(vertices.size());
  for (const auto& [p, s] : edges) succ[p].push_back(s);
  for (auto& lst : succ) std::sort(lst.begin(), lst.end());
  return succ;
}

std::vector<std::vector<int>> Task::predecessor_lists() const {
  std::vector<std::vector<int>> pred(vertices.size());
  for (const auto& [p, s] : edges) pred[s].push_back(p);
  for (auto& lst : pred) std::sort(lst.begin(), lst.end());
  return pred;
}

std::vector<int> Task::head_vertices() const {
  std::vector<bool> has_pred(vertices.size(), false);
  for (const auto& [p, s] : edges) {
    (void)p;
    if (s >= 0 && static_cast<std::size_t>(s) < vertices.size()) has_pred[s] = true;
  }
  std::vector<int> heads;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!has_pred[v]) heads.push_back(static_cast<int>(v));
  return heads;
}

std::vector<int> Task::tail_vertices() const {
  std::vector<bool> has_succ(vertices.size(), false);
  for (const auto& [p, s] : edges) {
    (void)s;
    if (p >= 0 && static_cast<std::size_t>(p) < vertices.size()) has_succ[p] = true;
  }
  std::vector<int> tails;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!has_succ[v]) tails.push_back(static_cast<int>(v));
  return tails;
}

const Task* TaskSet::task_by_id(int id) const {
  for (const auto& t : tasks)
    if (t.id == id) return &t;
  return nullptr;
}

std::vector<int> TaskSet::users_of(int resource) const {
  std::vector<int> users;
  for (const auto& t : tasks)
    if (t.uses(resource)) users.push_back(t.id);
  return users;
}

ResourceSpec TaskSet::resource_spec(int resource) const {
  ResourceSpec spec;
  spec.id = resource;
  auto users = users_of(resource);
  if (users.size() >= 2) {
    spec.scope = ResourceScope::global;
  } else {
    spec.scope = ResourceScope::local;
    spec.owner_task = users.empty() ? -1 : users.front();
  }
  return spec;
}

int TaskSet::ceiling_base(int resource) const {
  int best = INT_MIN;
  for (const auto& t : tasks)
    if (t.uses(resource)) best = std::max(best, t.priority);
  return best;
}

double TaskSet::total_utilization() const {
  double sum = 0;
  for (const auto& t : tasks) sum += t.utilization();
  return sum;
}

namespace {

// Topological order via Kahn's algorithm; empty result when a cycle exists.
std::vector<int> topological_order(const Task& task) {
  const std::size_t n = task.vertices.size();
  std::vector<int> indegree(n, 0);
  auto succ = task.successor_lists();
  for (const auto& [p, s] : task.edges) {
    (void)p;
    ++indegree[s];
  }
  std::deque<int> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push_back(static_cast<int>(v));
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (int s : succ[v])
      if (--indegree[s] == 0) ready.push_back(s);
  }
  if (order.size() != n) order.clear();
  return order;
}

}  // namespace

std::size_t count_complete_paths(const Task& task, std::size_t cap) {
  auto order = topological_order(task);
  if (order.empty() && !task.vertices.empty()) return 0;  // cyclic: caller validates
  const std::size_t saturate = cap + 1;
  auto succ = task.successor_lists();
  std::vector<std::size_t> downstream(task.vertices.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (succ[v].empty()) {
      downstream[v] = 1;
      continue;
    }
    std::size_t total = 0;
    for (int s : succ[v]) {
      total += downstream[s];
      if (total >= saturate) {
        total = saturate;
        break;
      }
    }
    downstream[v] = total;
  }
  std::size_t total = 0;
  for (int h : task.head_vertices()) {
    total += downstream[h];
    if (total >= saturate) return saturate;
  }
  return total;
}

bool for_each_path_profile(
    const Task& task, std::size_t cap,
    const std::function<void(time_ns, const std::vector<int>&,
                             const std::vector<int>&, const std::vector<int>&)>& fn) {
  if (task.vertices.empty()) return true;
  if (count_complete_paths(task, cap) > cap) return false;

  auto succ = task.successor_lists();
  std::vector<int> stack;

  // Dense count vector keyed by the resources this task uses.
  std::vector<int> used;
  for (const auto& [q, len] : task.cs_lengths) {
    (void)len;
    used.push_back(q);
  }
  for (const auto& v : task.vertices)
    for (const auto& [q, n] : v.demands) {
      (void)n;
      if (std::find(used.begin(), used.end(), q) == used.end()) used.push_back(q);
    }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::vector<int> vert_counts(used.size(), 0);

  auto add_vertex = [&](int v, int sign) {
    for (const auto& [q, n] : task.vertices[v].demands) {
      auto it = std::lower_bound(used.begin(), used.end(), q);
      vert_counts[static_cast<std::size_t>(it - used.begin())] += sign * n;
    }
  };

  std::function<void(int, time_ns)> dfs = [&](int v, time_ns length) {
    stack.push_back(v);
    add_vertex(v, +1);
    length += task.vertices[v].wcet;
    if (succ[v].empty()) {
      fn(length, used, vert_counts, stack);
    } else {
      for (int s : succ[v]) dfs(s, length);
    }
    add_vertex(v, -1);
    stack.pop_back();
  };

  for (int h : task.head_vertices()) dfs(h, 0);
  return true;
}

std::optional<std::vector<Path>> enumerate_complete_paths(const Task& task,
                                                          std::size_t cap) {
  if (count_complete_paths(task, cap) > cap) return std::nullopt;
  std::vector<Path> paths;
  auto succ = task.successor_lists();
  std::vector<int> stack;
  std::function<void(int)> dfs = [&](int v) {
    stack.push_back(v);
    if (succ[v].empty()) {
      Path p;
      p.vertices = stack;
      for (int u : stack) {
        p.length += task.vertices[u].wcet;
        for (const auto& [q, n] : task.vertices[u].demands) p.counts[q] += n;
      }
      paths.push_back(std::move(p));
    } else {
      for (int s : succ[v]) dfs(s);
    }
    stack.pop_back();
  };
  for (int h : task.head_vertices()) dfs(h);
  return paths;
}

time_ns longest_path_length(const Task& task) {
  auto order = topological_order(task);
  auto pred = task.predecessor_lists();
  std::vector<time_ns> dist(task.vertices.size(), 0);
  time_ns best = 0;
  for (int v : order) {
    time_ns in = 0;
    for (int p : pred[v]) in = std::max(in, dist[p]);
    dist[v] = in + task.vertices[v].wcet;
    best = std::max(best, dist[v]);
  }
  return best;
}

int path_request_count(const Path& path, int resource) {
  return path.count(resource);
}

std::vector<ValidationIssue> validate_task_set(const TaskSet& ts) {
  std::vector<ValidationIssue> issues;
  auto add = [&](int task, std::string code, std::string detail) {
    issues.push_back({task, std::move(code), std::move(detail)});
  };

  std::set<int> priorities;
  for (const auto& t : ts.tasks) {
    if (!priorities.insert(t.priority).second)
      add(t.id, "duplicate-priority",
          "base priority " + std::to_string(t.priority) + " is not unique");
  }

  for (const auto& t : ts.tasks) {
    const std::size_t n = t.vertices.size();
    if (n == 0) {
      add(t.id, "empty-task", "task has no vertices");
      continue;
    }
    if (t.deadline > t.period)
      add(t.id, "deadline-exceeds-period",
          "D=" + std::to_string(t.deadline) + " > T=" + std::to_string(t.period));
    if (t.period <= 0) add(t.id, "nonpositive-period", "period must be positive");

    bool edges_ok = true;
    for (const auto& [p, s] : t.edges) {
      if (p < 0 || s < 0 || static_cast<std::size_t>(p) >= n ||
          static_cast<std::size_t>(s) >= n) {
        add(t.id, "edge-out-of-range",
            "edge (" + std::to_string(p) + "," + std::to_string(s) + ")");
        edges_ok = false;
      }
    }
    if (edges_ok && topological_order(t).empty() && n > 0)
      add(t.id, "cycle", "edge relation is not acyclic");

    for (std::size_t v = 0; v < n; ++v) {
      if (t.vertices[v].wcet < 0)
        add(t.id, "negative-wcet", "vertex " + std::to_string(v));
      for (const auto& [q, cnt] : t.vertices[v].demands) {
        if (cnt < 0) add(t.id, "negative-demand", "vertex " + std::to_string(v));
        if (cnt > 0 && t.cs_length(q) <= 0)
          add(t.id, "missing-cs-length",
              "resource " + std::to_string(q) + " requested without a length");
      }
      if (t.vertex_noncritical(v) < 0)
        add(t.id, "vertex-demand-exceeds-wcet",
            "vertex " + std::to_string(v) + " critical sections exceed its WCET");
    }
    if (t.noncritical_wcet() < 0)
      add(t.id, "negative-noncritical-wcet",
          "total critical-section time exceeds C");
  }
  return issues;
}

}  // namespace fedlock
