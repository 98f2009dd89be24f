#include "fedlock/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fedlock {

std::vector<double> Scenario::utilization_grid() const {
  std::vector<double> grid;
  grid.reserve(points);
  for (int k = 1; k <= points; ++k)
    grid.push_back(static_cast<double>(m) * k / points);
  return grid;
}

static std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string Scenario::id() const {
  std::ostringstream ss;
  ss << "m" << m << "_nr" << nr_lo << "-" << nr_hi << "_u" << fmt_double(u_avg)
     << "_p" << fmt_double(p_r) << "_N" << n_hi << "_L" << l_lo / kMicrosecond
     << "-" << l_hi / kMicrosecond << "us";
  if (d_frac < 1.0) ss << "_d" << fmt_double(d_frac);
  return ss.str();
}

std::string Scenario::to_kv() const {
  std::ostringstream ss;
  ss << "m=" << m << "\n";
  ss << "nr_lo=" << nr_lo << "\n";
  ss << "nr_hi=" << nr_hi << "\n";
  ss << "u_avg=" << fmt_double(u_avg) << "\n";
  ss << "p_r=" << fmt_double(p_r) << "\n";
  ss << "n_lo=" << n_lo << "\n";
  ss << "n_hi=" << n_hi << "\n";
  ss << "l_lo_ns=" << l_lo << "\n";
  ss << "l_hi_ns=" << l_hi << "\n";
  ss << "t_lo_ns=" << t_lo << "\n";
  ss << "t_hi_ns=" << t_hi << "\n";
  ss << "v_lo=" << v_lo << "\n";
  ss << "v_hi=" << v_hi << "\n";
  ss << "edge_prob=" << fmt_double(edge_prob) << "\n";
  ss << "d_frac=" << fmt_double(d_frac) << "\n";
  ss << "points=" << points << "\n";
  ss << "reps=" << reps << "\n";
  ss << "seed=" << seed << "\n";
  return ss.str();
}

Scenario Scenario::from_kv(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos || line.empty() || line[0] == '#') continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "m") s.m = std::stoi(val);
    else if (key == "nr_lo") s.nr_lo = std::stoi(val);
    else if (key == "nr_hi") s.nr_hi = std::stoi(val);
    else if (key == "u_avg") s.u_avg = std::stod(val);
    else if (key == "p_r") s.p_r = std::stod(val);
    else if (key == "n_lo") s.n_lo = std::stoi(val);
    else if (key == "n_hi") s.n_hi = std::stoi(val);
    else if (key == "l_lo_ns") s.l_lo = std::stoll(val);
    else if (key == "l_hi_ns") s.l_hi = std::stoll(val);
    else if (key == "t_lo_ns") s.t_lo = std::stoll(val);
    else if (key == "t_hi_ns") s.t_hi = std::stoll(val);
    else if (key == "v_lo") s.v_lo = std::stoi(val);
    else if (key == "v_hi") s.v_hi = std::stoi(val);
    else if (key == "edge_prob") s.edge_prob = std::stod(val);
    else if (key == "d_frac") s.d_frac = std::stod(val);
    else if (key == "points") s.points = std::stoi(val);
    else if (key == "reps") s.reps = std::stoi(val);
    else if (key == "seed") s.seed = std::stoull(val);
  }
  return s;
}

std::vector<double> rand_fixed_sum(int n, double total, double lo, double hi,
                                   Rng& rng) {
  constexpr double kEps = 1e-9;
  if (n < 1 || hi < lo)
    throw std::invalid_argument("rand_fixed_sum: bad arguments");
  if (total < n * lo - kEps || total > n * hi + kEps)
    throw std::invalid_argument("rand_fixed_sum: infeasible bounds");
  if (n == 1) return {std::clamp(total, lo, hi)};
  if (hi - lo < 1e-12) return std::vector<double>(n, lo);

  // Work in the unit box: n values in [0,1] summing to s.
  double s = std::clamp((total - n * lo) / (hi - lo), 0.0, static_cast<double>(n));
  int k = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
  s = std::clamp(s, static_cast<double>(k), static_cast<double>(k) + 1.0);

  // 1-based tables, following the reference construction.
  std::vector<double> s1(n + 1), s2(n + 1);
  for (int i = 1; i <= n; ++i) {
    s1[i] = s - (k - (i - 1));
    s2[i] = (k + n - (i - 1)) - s;
  }
  const double huge = std::numeric_limits<double>::max();
  const double tiny = std::numeric_limits<double>::min();
  std::vector<std::vector<double>> w(n + 1, std::vector<double>(n + 2, 0.0));
  std::vector<std::vector<double>> t(n, std::vector<double>(n + 1, 0.0));
  w[1][2] = huge;
  for (int i = 2; i <= n; ++i) {
    for (int j = 1; j <= i; ++j) {
      double tmp1 = w[i - 1][j + 1] * s1[j] / i;
      double tmp2 = w[i - 1][j] * s2[n - i + j] / i;
      w[i][j + 1] = tmp1 + tmp2;
      double tmp3 = w[i][j + 1] + tiny;
      t[i - 1][j] = (s2[n - i + j] > s1[j]) ? tmp2 / tmp3 : 1.0 - tmp1 / tmp3;
    }
  }

  std::vector<double> x(n + 1, 0.0);
  double rem = s;
  int j = k + 1;
  double sm = 0.0, pr = 1.0;
  for (int i = n - 1; i >= 1; --i) {
    double e = rng.real01() <= t[i][j] ? 1.0 : 0.0;
    double sx = std::pow(rng.real01(), 1.0 / i);
    sm += (1.0 - sx) * pr * rem / (i + 1);
    pr *= sx;
    x[n - i] = sm + pr * e;
    rem -= e;
    j -= static_cast<int>(e);
  }
  x[n] = sm + pr * rem;

  std::vector<double> out(x.begin() + 1, x.end());
  for (int i = n - 1; i > 0; --i)
    std::swap(out[i], out[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  for (double& v : out) v = std::clamp(lo + (hi - lo) * v, lo, hi);
  return out;
}

DagStructure generate_dag(int n_vertices, double edge_prob, Rng& rng) {
  DagStructure d;
  d.n_vertices = n_vertices;
  for (int a = 0; a < n_vertices; ++a)
    for (int b = a + 1; b < n_vertices; ++b)
      if (rng.real01() < edge_prob) d.edges.emplace_back(a, b);
  return d;
}

namespace {

// Integer masses proportional to weights summing exactly to total
// (largest-remainder rounding, ties to lower index).
std::vector<time_ns> prorate(time_ns total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  double wsum = 0;
  for (double w : weights) wsum += w;
  std::vector<time_ns> out(n, 0);
  std::vector<std::pair<double, std::size_t>> remainders(n);
  time_ns assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double share = wsum > 0 ? static_cast<double>(total) * weights[i] / wsum
                            : static_cast<double>(total) / n;
    time_ns base = static_cast<time_ns>(std::floor(share));
    out[i] = base;
    assigned += base;
    remainders[i] = {share - static_cast<double>(base), i};
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  time_ns leftover = total - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % n, --leftover)
    ++out[remainders[i].second];
  return out;
}

// Longest path through the DAG by vertex weight; returns the vertex list.
std::vector<int> longest_weighted_path(const Task& t) {
  auto pred = t.predecessor_lists();
  auto succ = t.successor_lists();
  const std::size_t n = t.vertices.size();
  std::vector<time_ns> dist(n, -1);
  std::vector<int> from(n, -1);
  std::vector<int> indeg(n, 0);
  for (const auto& [p, s] : t.edges) {
    (void)p;
    ++indeg[s];
  }
  std::vector<int> order;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) order.push_back(static_cast<int>(v));
  for (std::size_t i = 0; i < order.size(); ++i) {
    int v = order[i];
    if (dist[v] < 0) dist[v] = t.vertices[v].wcet;
    for (int s : succ[v]) {
      if (dist[v] + t.vertices[s].wcet > dist[s]) {
        dist[s] = dist[v] + t.vertices[s].wcet;
        from[s] = v;
      }
      if (--indeg[s] == 0) order.push_back(s);
    }
  }
  int best = 0;
  for (std::size_t v = 1; v < n; ++v)
    if (dist[v] > dist[best]) best = static_cast<int>(v);
  std::vector<int> path;
  for (int v = best; v >= 0; v = from[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Move WCET mass off the longest chains until 2*L < D holds. Preserves the
// task total; gives up when the structure leaves nowhere to move mass.
void shrink_longest_chains(Task& t, time_ns deadline) {
  const time_ns target = (deadline - 1) / 2;  // 2*L* <= D-1
  for (int round = 0; round < 1000; ++round) {
    time_ns lstar = longest_path_length(t);
    if (2 * lstar < deadline) return;
    auto path = longest_weighted_path(t);
    std::vector<bool> on_path(t.vertices.size(), false);
    for (int v : path) on_path[v] = true;
    bool has_offpath = false;
    for (std::size_t v = 0; v < t.vertices.size(); ++v)
      if (!on_path[v]) has_offpath = true;
    if (!has_offpath)
      throw GenerationFailure("longest-path-below-half-deadline");

    time_ns removed = 0;
    for (int v : path) {
      time_ns w = t.vertices[v].wcet;
      time_ns shrunk =
          std::max<time_ns>(1, w * target / std::max<time_ns>(1, lstar));
      removed += w - shrunk;
      t.vertices[v].wcet = shrunk;
    }
    if (removed <= 0) throw GenerationFailure("longest-path-below-half-deadline");
    std::vector<double> weights;
    std::vector<int> off;
    for (std::size_t v = 0; v < t.vertices.size(); ++v)
      if (!on_path[v]) {
        off.push_back(static_cast<int>(v));
        weights.push_back(static_cast<double>(t.vertices[v].wcet) + 1.0);
      }
    auto extra = prorate(removed, weights);
    for (std::size_t i = 0; i < off.size(); ++i)
      t.vertices[off[i]].wcet += extra[i];
  }
  throw GenerationFailure("longest-path-below-half-deadline");
}

// Distribute per-resource request counts over vertices with spare capacity
// under wcet >= sum of the vertex's critical sections.
bool split_demands(Task& t, const std::map<int, std::pair<int, time_ns>>& usage,
                   Rng& rng) {
  std::vector<time_ns> spare(t.vertices.size());
  for (std::size_t v = 0; v < t.vertices.size(); ++v)
    spare[v] = t.vertices[v].wcet;
  for (auto& v : t.vertices) v.demands.clear();
  for (const auto& [q, nl] : usage) {
    auto [count, len] = nl;
    for (int r = 0; r < count; ++r) {
      std::vector<int> candidates;
      for (std::size_t v = 0; v < t.vertices.size(); ++v)
        if (spare[v] >= len) candidates.push_back(static_cast<int>(v));
      if (candidates.empty()) return false;
      int v = candidates[rng.below(candidates.size())];
      ++t.vertices[v].demands[q];
      spare[v] -= len;
    }
  }
  return true;
}

}  // namespace

TaskSet generate_task_set(const Scenario& scenario, double target_utilization,
                          Rng& rng) {
  const double lo = 1.0;
  const double hi = 2.0 * scenario.u_avg;

  int n_r = static_cast<int>(rng.int_in(scenario.nr_lo, scenario.nr_hi));

  int n = std::max(1, static_cast<int>(std::llround(target_utilization /
                                                    scenario.u_avg)));
  while (n * hi < target_utilization - 1e-9) ++n;
  while (n > 1 && n * lo > target_utilization) --n;

  std::vector<double> utils;
  if (n == 1) {
    utils = {std::min(target_utilization, hi)};
  } else {
    utils = rand_fixed_sum(n, target_utilization, lo, hi, rng);
  }

  std::vector<time_ns> periods(n);
  for (int i = 0; i < n; ++i)
    periods[i] = static_cast<time_ns>(std::llround(rng.log_uniform(
        static_cast<double>(scenario.t_lo), static_cast<double>(scenario.t_hi))));

  // Rate-monotonic priorities: shorter period = higher priority, ties broken
  // toward the lower task id.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (periods[a] != periods[b]) return periods[a] < periods[b];
    return a < b;
  });
  std::vector<int> priority(n);
  for (int rank = 0; rank < n; ++rank) priority[order[rank]] = n - rank;

  TaskSet ts;
  ts.m = scenario.m;
  for (int q = 0; q < n_r; ++q) ts.resource_ids.push_back(q);

  for (int i = 0; i < n; ++i) {
    Task t;
    t.id = i;
    t.priority = priority[i];
    t.period = periods[i];
    t.deadline = periods[i];
    if (scenario.d_frac < 1.0)
      t.deadline = std::max<time_ns>(
          1, std::min(periods[i],
                      static_cast<time_ns>(std::llround(
                          scenario.d_frac * static_cast<double>(periods[i])))));
    time_ns wcet = static_cast<time_ns>(
        std::llround(utils[i] * static_cast<double>(periods[i])));
    if (utils[i] > 1.0) wcet = std::max(wcet, periods[i] + 1);
    wcet = std::max<time_ns>(wcet, 1);

    // Resource usage: each resource with probability p_r; redraw when the
    // critical sections cannot fit into the task WCET.
    std::map<int, std::pair<int, time_ns>> usage;  // q -> (count, length)
    bool usage_ok = false;
    for (int attempt = 0; attempt < 100 && !usage_ok; ++attempt) {
      usage.clear();
      time_ns cs_total = 0;
      for (int q = 0; q < n_r; ++q) {
        if (rng.real01() < scenario.p_r) {
          int count = static_cast<int>(rng.int_in(scenario.n_lo, scenario.n_hi));
          time_ns len = rng.int_in(scenario.l_lo, scenario.l_hi);
          usage[q] = {count, len};
          cs_total += static_cast<time_ns>(count) * len;
        }
      }
      usage_ok = cs_total <= wcet;
    }
    if (!usage_ok) throw GenerationFailure("critical-sections-exceed-wcet");
    for (const auto& [q, nl] : usage) t.cs_lengths[q] = nl.second;

    // DAG structure and WCET split, regenerated until the longest path fits
    // below half the deadline and the demands find vertices with capacity.
    bool built = false;
    for (int attempt = 0; attempt < 100 && !built; ++attempt) {
      auto dag = generate_dag(
          static_cast<int>(rng.int_in(scenario.v_lo, scenario.v_hi)),
          scenario.edge_prob, rng);
      std::vector<double> weights(dag.n_vertices);
      for (auto& w : weights) w = rng.real01();
      auto masses = prorate(wcet, weights);
      t.vertices.assign(dag.n_vertices, Vertex{});
      for (int v = 0; v < dag.n_vertices; ++v) t.vertices[v].wcet = masses[v];
      t.edges = dag.edges;
      if (2 * longest_path_length(t) >= t.deadline) {
        if (attempt + 1 < 100) continue;
        shrink_longest_chains(t, t.deadline);
      }
      for (int split_try = 0; split_try < 100 && !built; ++split_try)
        built = split_demands(t, usage, rng);
    }
    if (!built) throw GenerationFailure("vertex-demand-capacity");
    ts.tasks.push_back(std::move(t));
  }

  auto issues = validate_task_set(ts);
  if (!issues.empty())
    throw GenerationFailure("validation:" + issues.front().code);
  return ts;
}

TaskSet grid_replicate(const Scenario& scenario, int point_index, int replicate,
                       int* redraws) {
  auto grid = scenario.utilization_grid();
  double target = grid.at(static_cast<std::size_t>(point_index));
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::uint64_t seed = derive_seed(scenario.seed,
                                     {static_cast<std::uint64_t>(point_index),
                                      static_cast<std::uint64_t>(replicate),
                                      static_cast<std::uint64_t>(attempt)});
    Rng rng(seed);
    try {
      TaskSet ts = generate_task_set(scenario, target, rng);
      ts.meta["scenario"] = scenario.id();
      ts.meta["seed"] = std::to_string(scenario.seed);
      ts.meta["point_index"] = std::to_string(point_index);
      ts.meta["replicate"] = std::to_string(replicate);
      ts.meta["attempt"] = std::to_string(attempt);
      ts.meta["stream_seed"] = std::to_string(seed);
      if (redraws) *redraws = attempt;
      return ts;
    } catch (const GenerationFailure&) {
      continue;
    }
  }
  throw GenerationFailure("replicate-retries-exhausted");
}

}  // namespace fedlock
