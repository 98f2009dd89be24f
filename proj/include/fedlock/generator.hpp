#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedlock/model.hpp"
#include "fedlock/rng.hpp"
#include "fedlock/time.hpp"

namespace fedlock {

/// One experimental configuration: platform size, resource-count range,
/// average task utilization, per-resource usage probability, request-count
/// and critical-section-length ranges, the utilization grid and replication.
struct Scenario {
  int m = 8;
  int nr_lo = 2, nr_hi = 4;
  double u_avg = 1.5;         // per-task utilizations drawn from (1, 2*u_avg]
  double p_r = 0.5;           // probability a task uses a given resource
  int n_lo = 1, n_hi = 25;    // request-count range per used resource
  time_ns l_lo = 15 * kMicrosecond, l_hi = 50 * kMicrosecond;
  time_ns t_lo = 10 * kMillisecond, t_hi = 1000 * kMillisecond;
  int v_lo = 10, v_hi = 100;  // DAG vertex-count range
  double edge_prob = 0.1;
  double d_frac = 1.0;        // deadline as a fraction of the period
  int points = 20;            // utilization grid: k/points * m, k = 1..points
  int reps = 100;             // tasksets per grid point
  std::uint64_t seed = 1;

  /// Grid of total utilizations, k/points * m for k = 1..points.
  std::vector<double> utilization_grid() const;

  std::string id() const;

  /// Flat key=value text form.
  std::string to_kv() const;
  static Scenario from_kv(const std::string& text);
};

/// Generation gave up after bounded retries; carries the constraint that
/// could not be satisfied.
struct GenerationFailure : std::runtime_error {
  explicit GenerationFailure(const std::string& constraint)
      : std::runtime_error("generation failed: " + constraint),
        constraint(constraint) {}
  std::string constraint;
};

/// n values in [lo, hi] summing to total, distributed per the standard
/// RandFixedSum construction (uniform over the constrained simplex).
/// Throws std::invalid_argument when n*lo <= total <= n*hi fails.
std::vector<double> rand_fixed_sum(int n, double total, double lo, double hi,
                                   Rng& rng);

struct DagStructure {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;  // lower index -> higher index
};

/// Random DAG: every ordered pair (a, b) with a < b receives an edge
/// independently with the given probability. Acyclic by construction.
DagStructure generate_dag(int n_vertices, double edge_prob, Rng& rng);

/// A full synthetic task set at one total-utilization point. Deterministic in
/// (scenario, target, rng state); the result always passes validation and
/// satisfies the plausibility constraints (critical sections fit their
/// vertices, longest path below half the deadline).
TaskSet generate_task_set(const Scenario& scenario, double target_utilization,
                          Rng& rng);

/// The taskset for one grid replicate, with retry-on-failure and the seed
/// tuple recorded in meta. attempt_out (optional) reports how many redraws
/// were needed.
TaskSet grid_replicate(const Scenario& scenario, int point_index, int replicate,
                       int* redraws = nullptr);

}  // namespace fedlock
