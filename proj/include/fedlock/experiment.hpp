#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fedlock/generator.hpp"
#include "fedlock/partitioning.hpp"

namespace fedlock {

struct ExperimentConfig {
  Scenario scenario;
  std::vector<PartitionMode> modes = {PartitionMode::dpcp_ep,
                                      PartitionMode::dpcp_en,
                                      PartitionMode::fed_fp};
  int jobs = 1;  // worker threads over replicates
  std::size_t path_cap = kDefaultPathCap;
  bool sim_check = false;  // simulate accepted tasksets and audit the bounds
};

struct ResultRow {
  std::string scenario_id;
  Scenario scenario;
  int point_index = 0;
  double utilization = 0;
  PartitionMode mode = PartitionMode::dpcp_ep;
  int accepted = 0;
  int total = 0;
  int regen_failures = 0;  // replicate redraws due to generation failures
  int sim_violations = 0;  // response-bound violations when sim_check is on

  double ratio() const {
    return total > 0 ? static_cast<double>(accepted) / total : 0.0;
  }
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

/// Per-replicate observer: (point_index, replicate, mode, outcome, taskset).
/// Called under a lock; replicates arrive in an unspecified order.
using ReplicateObserver = std::function<void(
    int, int, PartitionMode, const PartitionOutcome&, const TaskSet&)>;

/// Generates and analyzes the full utilization grid of one scenario. Every
/// mode sees the same tasksets; the result is deterministic in the scenario
/// seed regardless of the worker count.
ResultTable run_scenario_grid(const ExperimentConfig& config,
                              const ReplicateObserver& observer = nullptr);

struct PairComparison {
  int scenarios = 0;    // scenarios compared
  int outperformed = 0; // A accepted strictly more tasksets in total
  int dominated = 0;    // A never below B, strictly above somewhere
};

/// Dominance/outperformance of mode A over mode B across the scenarios in
/// the tables. Throws std::invalid_argument when the two modes were not
/// evaluated on identical taskset universes.
PairComparison dominance_outperformance(const std::vector<ResultTable>& tables,
                                        PartitionMode a, PartitionMode b);

/// One table per scenario id, in first-appearance order.
std::vector<ResultTable> split_by_scenario(const ResultTable& table);

/// The full cross product of the study's parameter ranges: three platform
/// sizes, three resource-count ranges, two average utilizations, three usage
/// probabilities, two request-count caps and two section-length ranges (216
/// scenarios). Per-scenario seeds derive from the master seed.
std::vector<Scenario> full_scenario_set(int reps, std::uint64_t master_seed);

std::string table_to_csv(const ResultTable& table);
ResultTable table_from_csv(const std::string& csv);

/// CSV plus one plot-data file (normalized_utilization, ratio) per
/// (scenario, mode) under the output directory.
void emit_results(const ResultTable& table, const std::string& out_dir);

}  // namespace fedlock
