#include "fedlock/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fedlock/json_io.hpp"
#include "fedlock/simulator.hpp"

namespace fedlock {

namespace {

PartitionMode mode_from_name(const std::string& name) {
  if (name == "EP") return PartitionMode::dpcp_ep;
  if (name == "EN") return PartitionMode::dpcp_en;
  if (name == "FED-FP") return PartitionMode::fed_fp;
  throw std::invalid_argument("unknown mode: " + name);
}

struct Cell {
  int accepted = 0;
  int total = 0;
  int regen_failures = 0;
  int sim_violations = 0;
};

}  // namespace

ResultTable run_scenario_grid(const ExperimentConfig& config,
                              const ReplicateObserver& observer) {
  const Scenario& sc = config.scenario;
  if (sc.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (config.modes.empty()) throw std::invalid_argument("no modes selected");

  const auto grid = sc.utilization_grid();
  const int n_points = static_cast<int>(grid.size());
  const int n_jobs = static_cast<int>(sc.reps) * n_points;

  // Keyed accumulation so the merge order never depends on thread timing.
  std::map<std::pair<int, PartitionMode>, Cell> cells;
  std::mutex merge_mutex;
  std::atomic<int> cursor{0};

  auto worker = [&]() {
    for (;;) {
      int idx = cursor.fetch_add(1);
      if (idx >= n_jobs) return;
      int point = idx / sc.reps;
      int rep = idx % sc.reps;
      int redraws = 0;
      TaskSet ts = grid_replicate(sc, point, rep, &redraws);

      struct Local {
        PartitionMode mode;
        bool accepted;
        int violations;
      };
      std::vector<Local> locals;
      std::vector<PartitionOutcome> outcomes;
      for (PartitionMode mode : config.modes) {
        PartitionOutcome outcome = partition_and_analyze(ts, mode, config.path_cap);
        int violations = 0;
        if (config.sim_check && outcome.schedulable &&
            mode != PartitionMode::fed_fp) {
          SimConfig sim;
          time_ns max_period = 0;
          for (const auto& t : ts.tasks) max_period = std::max(max_period, t.period);
          sim.horizon = 2 * max_period;
          sim.seed = sc.seed;
          SimTrace trace = simulate(ts, outcome.assignment, sim);
          violations = static_cast<int>(
              check_response_bounds(trace, outcome.report, ts).size());
        }
        locals.push_back({mode, outcome.schedulable, violations});
        outcomes.push_back(std::move(outcome));
      }

      std::lock_guard<std::mutex> lock(merge_mutex);
      for (std::size_t i = 0; i < locals.size(); ++i) {
        Cell& cell = cells[{point, locals[i].mode}];
        cell.total += 1;
        cell.accepted += locals[i].accepted ? 1 : 0;
        cell.regen_failures += redraws;
        cell.sim_violations += locals[i].violations;
        if (observer)
          observer(point, rep, locals[i].mode, outcomes[i], ts);
      }
    }
  };

  int workers = std::max(1, config.jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ResultTable table;
  for (int point = 0; point < n_points; ++point) {
    for (PartitionMode mode : config.modes) {
      auto it = cells.find({point, mode});
      if (it == cells.end()) continue;
      ResultRow row;
      row.scenario_id = sc.id();
      row.scenario = sc;
      row.point_index = point;
      row.utilization = grid[static_cast<std::size_t>(point)];
      row.mode = mode;
      row.accepted = it->second.accepted;
      row.total = it->second.total;
      row.regen_failures = it->second.regen_failures;
      row.sim_violations = it->second.sim_violations;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

PairComparison dominance_outperformance(const std::vector<ResultTable>& tables,
                                        PartitionMode a, PartitionMode b) {
  PairComparison cmp;
  for (const auto& table : tables) {
    // Collect per-point (accepted, total) for both modes.
    std::map<int, std::pair<ResultRow, ResultRow>> points;  // point -> (a, b)
    std::map<int, std::pair<bool, bool>> present;
    for (const auto& row : table.rows) {
      if (row.mode == a) {
        points[row.point_index].first = row;
        present[row.point_index].first = true;
      } else if (row.mode == b) {
        points[row.point_index].second = row;
        present[row.point_index].second = true;
      }
    }
    if (points.empty()) continue;
    long total_a = 0, total_b = 0;
    bool never_below = true, somewhere_above = false;
    for (const auto& [point, pair] : points) {
      const auto& flags = present.at(point);
      if (!flags.first || !flags.second)
        throw std::invalid_argument("modes evaluated on different grids");
      if (pair.first.total != pair.second.total)
        throw std::invalid_argument("modes evaluated on different tasksets");
      total_a += pair.first.accepted;
      total_b += pair.second.accepted;
      if (pair.first.accepted < pair.second.accepted) never_below = false;
      if (pair.first.accepted > pair.second.accepted) somewhere_above = true;
    }
    cmp.scenarios += 1;
    if (total_a > total_b) cmp.outperformed += 1;
    if (never_below && somewhere_above) cmp.dominated += 1;
  }
  return cmp;
}

std::vector<ResultTable> split_by_scenario(const ResultTable& table) {
  std::vector<ResultTable> out;
  std::map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    auto it = index.find(row.scenario_id);
    if (it == index.end()) {
      index.emplace(row.scenario_id, out.size());
      out.emplace_back();
      out.back().rows.push_back(row);
    } else {
      out[it->second].rows.push_back(row);
    }
  }
  return out;
}

std::vector<Scenario> full_scenario_set(int reps, std::uint64_t master_seed) {
  const int platform_sizes[] = {8, 16, 32};
  const std::pair<int, int> resource_ranges[] = {{2, 4}, {4, 8}, {8, 16}};
  const double avg_utils[] = {1.5, 2.0};
  const double usage_probs[] = {0.5, 0.75, 1.0};
  const int request_caps[] = {25, 50};
  const std::pair<time_ns, time_ns> length_ranges[] = {
      {15 * kMicrosecond, 50 * kMicrosecond},
      {50 * kMicrosecond, 100 * kMicrosecond}};

  std::vector<Scenario> out;
  std::uint64_t index = 0;
  for (int m : platform_sizes)
    for (const auto& nr : resource_ranges)
      for (double u_avg : avg_utils)
        for (double p_r : usage_probs)
          for (int n_hi : request_caps)
            for (const auto& lr : length_ranges) {
              Scenario sc;
              sc.m = m;
              sc.nr_lo = nr.first;
              sc.nr_hi = nr.second;
              sc.u_avg = u_avg;
              sc.p_r = p_r;
              sc.n_hi = n_hi;
              sc.l_lo = lr.first;
              sc.l_hi = lr.second;
              sc.reps = reps;
              sc.seed = derive_seed(master_seed, {index++});
              out.push_back(sc);
            }
  return out;
}

namespace {

std::string fmt_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string table_to_csv(const ResultTable& table) {
  std::ostringstream ss;
  ss << "scenario,m,nr_lo,nr_hi,uavg,pr,nmax,llo_us,lhi_us,upoint,mode,accepted,"
        "total,ratio,regen_failures,sim_violations\n";
  for (const auto& r : table.rows) {
    ss << r.scenario_id << "," << r.scenario.m << "," << r.scenario.nr_lo << ","
       << r.scenario.nr_hi << "," << fmt_g(r.scenario.u_avg) << ","
       << fmt_g(r.scenario.p_r) << "," << r.scenario.n_hi << ","
       << r.scenario.l_lo / kMicrosecond << "," << r.scenario.l_hi / kMicrosecond
       << "," << fmt_ratio(r.utilization) << "," << mode_name(r.mode) << ","
       << r.accepted << "," << r.total << "," << fmt_ratio(r.ratio()) << ","
       << r.regen_failures << "," << r.sim_violations << "\n";
  }
  return ss.str();
}

ResultTable table_from_csv(const std::string& csv) {
  ResultTable table;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() < 16) throw std::invalid_argument("malformed CSV row");
    ResultRow r;
    r.scenario_id = fields[0];
    r.scenario.m = std::stoi(fields[1]);
    r.scenario.nr_lo = std::stoi(fields[2]);
    r.scenario.nr_hi = std::stoi(fields[3]);
    r.scenario.u_avg = std::stod(fields[4]);
    r.scenario.p_r = std::stod(fields[5]);
    r.scenario.n_hi = std::stoi(fields[6]);
    r.scenario.l_lo = std::stoll(fields[7]) * kMicrosecond;
    r.scenario.l_hi = std::stoll(fields[8]) * kMicrosecond;
    r.utilization = std::stod(fields[9]);
    r.mode = mode_from_name(fields[10]);
    r.accepted = std::stoi(fields[11]);
    r.total = std::stoi(fields[12]);
    r.regen_failures = std::stoi(fields[14]);
    r.sim_violations = std::stoi(fields[15]);
    // Reconstruct the point index from the utilization fraction.
    r.point_index = static_cast<int>(std::lround(
        r.utilization / r.scenario.m * r.scenario.points)) - 1;
    table.rows.push_back(std::move(r));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::string& out_dir) {
  if (table.rows.empty()) throw std::invalid_argument("empty result table");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file(out_dir + "/results.csv", table_to_csv(table));

  std::map<std::pair<std::string, PartitionMode>, std::ostringstream> plots;
  for (const auto& r : table.rows) {
    auto& ss = plots[{r.scenario_id, r.mode}];
    if (ss.tellp() == 0) ss << "normalized_utilization,ratio\n";
    ss << fmt_ratio(r.utilization / r.scenario.m) << "," << fmt_ratio(r.ratio())
       << "\n";
  }
  for (auto& [key, ss] : plots) {
    std::string name =
        out_dir + "/plot_" + key.first + "_" + mode_name(key.second) + ".csv";
    write_file(name, ss.str());
  }
}

}  // namespace fedlock
