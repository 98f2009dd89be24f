#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedlock/experiment.hpp"
#include "fedlock/generator.hpp"
#include "fedlock/json_io.hpp"
#include "fedlock/partitioning.hpp"
#include "fedlock/simulator.hpp"

using namespace fedlock;

namespace {

std::vector<PartitionMode> parse_modes(const std::string& arg) {
  std::vector<PartitionMode> modes;
  std::istringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::transform(item.begin(), item.end(), item.begin(), ::tolower);
    if (item == "ep") modes.push_back(PartitionMode::dpcp_ep);
    else if (item == "en") modes.push_back(PartitionMode::dpcp_en);
    else if (item == "fedfp" || item == "fed-fp") modes.push_back(PartitionMode::fed_fp);
    else throw CLI::ValidationError("--modes", "unknown mode: " + item);
  }
  if (modes.empty()) throw CLI::ValidationError("--modes", "no modes given");
  return modes;
}

// Scenario options shared by gen/grid: flags layered over an optional
// key=value scenario file, explicit flags winning.
struct ScenarioArgs {
  Scenario flags;
  std::string nr, lrange, file;
  CLI::Option *o_m = nullptr, *o_uavg = nullptr, *o_pr = nullptr,
              *o_nmax = nullptr, *o_points = nullptr, *o_reps = nullptr,
              *o_seed = nullptr, *o_dfrac = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--scenario-file", file,
                    "key=value scenario file used as the base configuration");
    o_m = app->add_option("--m", flags.m, "processor count");
    app->add_option("--nr", nr, "resource count range lo,hi");
    o_uavg = app->add_option("--uavg", flags.u_avg, "average task utilization");
    o_pr = app->add_option("--pr", flags.p_r, "per-resource usage probability");
    o_nmax = app->add_option("--nmax", flags.n_hi, "max requests per used resource");
    app->add_option("--lrange", lrange, "critical-section length range in us, lo,hi");
    o_dfrac = app->add_option("--dfrac", flags.d_frac,
                              "deadline as a fraction of the period");
    o_points = app->add_option("--points", flags.points, "utilization grid points");
    o_reps = app->add_option("--reps", flags.reps, "tasksets per grid point");
    o_seed = app->add_option("--seed", flags.seed, "master seed");
  }

  Scenario resolve() const {
    Scenario sc = file.empty() ? Scenario{} : Scenario::from_kv(read_file(file));
    if (o_m->count()) sc.m = flags.m;
    if (o_uavg->count()) sc.u_avg = flags.u_avg;
    if (o_pr->count()) sc.p_r = flags.p_r;
    if (o_nmax->count()) sc.n_hi = flags.n_hi;
    if (o_dfrac->count()) sc.d_frac = flags.d_frac;
    if (o_points->count()) sc.points = flags.points;
    if (o_reps->count()) sc.reps = flags.reps;
    if (o_seed->count()) sc.seed = flags.seed;
    auto parse_pair = [](const std::string& s, long long& lo, long long& hi) {
      auto comma = s.find(',');
      if (comma == std::string::npos)
        throw CLI::ValidationError("range", "expected lo,hi: " + s);
      lo = std::stoll(s.substr(0, comma));
      hi = std::stoll(s.substr(comma + 1));
    };
    if (!nr.empty()) {
      long long lo, hi;
      parse_pair(nr, lo, hi);
      sc.nr_lo = static_cast<int>(lo);
      sc.nr_hi = static_cast<int>(hi);
    }
    if (!lrange.empty()) {
      long long lo, hi;
      parse_pair(lrange, lo, hi);
      sc.l_lo = lo * kMicrosecond;
      sc.l_hi = hi * kMicrosecond;
    }
    return sc;
  }
};

std::string dominance_csv(const std::vector<ResultTable>& tables,
                          const std::vector<PartitionMode>& modes) {
  std::ostringstream stats;
  stats << "mode_a,mode_b,scenarios,outperforms,outperforms_pct,dominates,"
           "dominates_pct\n";
  char buf[32];
  for (PartitionMode a : modes)
    for (PartitionMode b : modes) {
      if (a == b) continue;
      auto cmp = dominance_outperformance(tables, a, b);
      auto pct = [&](int n) {
        std::snprintf(buf, sizeof(buf), "%.1f",
                      cmp.scenarios ? 100.0 * n / cmp.scenarios : 0.0);
        return std::string(buf);
      };
      stats << mode_name(a) << "," << mode_name(b) << "," << cmp.scenarios << ","
            << cmp.outperformed << "," << pct(cmp.outperformed) << ","
            << cmp.dominated << "," << pct(cmp.dominated) << "\n";
    }
  return stats.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedulability toolkit for parallel DAG tasks with distributed "
               "priority-ceiling locking under federated scheduling"};
  app.require_subcommand(1);

  // gen: emit one generated task set as JSON.
  auto* gen = app.add_subcommand("gen", "generate a task set");
  ScenarioArgs gen_args;
  std::string gen_out = "-";
  int gen_point = 10, gen_rep = 0;
  gen_args.add_to(gen);
  gen->add_option("--point", gen_point, "utilization grid point index");
  gen->add_option("--rep", gen_rep, "replicate index");
  gen->add_option("--out", gen_out, "output file (- for stdout)");

  // validate: structural checks on a task-set file.
  auto* validate = app.add_subcommand("validate", "validate a task-set JSON file");
  std::string validate_in;
  validate->add_option("file", validate_in, "task-set JSON")->required();

  // analyze: partition + response-time analysis.
  auto* analyze = app.add_subcommand("analyze", "partition and analyze a task set");
  std::string analyze_in, analyze_mode = "ep", analyze_report = "-",
              analyze_assignment;
  std::size_t analyze_cap = kDefaultPathCap;
  analyze->add_option("file", analyze_in, "task-set JSON")->required();
  analyze->add_option("--mode", analyze_mode, "ep | en | fedfp");
  analyze->add_option("--paths-cap", analyze_cap, "path enumeration cap");
  analyze->add_option("--report", analyze_report, "report output (- for stdout)");
  analyze->add_option("--assignment", analyze_assignment, "assignment output file");

  // simulate: run the protocol and export the trace.
  auto* sim = app.add_subcommand("simulate", "simulate a task set");
  std::string sim_in, sim_assignment, sim_trace = "-", sim_csv;
  std::string sim_release = "periodic", sim_exec = "wcet";
  double sim_horizon_periods = 2.0;
  std::uint64_t sim_seed = 0;
  bool sim_audit = false;
  sim->add_option("file", sim_in, "task-set JSON")->required();
  sim->add_option("--assignment", sim_assignment,
                  "assignment JSON (derived via partitioning when omitted)");
  sim->add_option("--trace", sim_trace, "NDJSON trace output (- for stdout)");
  sim->add_option("--csv", sim_csv, "compact CSV projection output");
  sim->add_option("--horizon-periods", sim_horizon_periods,
                  "horizon as a multiple of the largest period");
  sim->add_option("--release", sim_release, "periodic | sporadic");
  sim->add_option("--exec", sim_exec, "wcet | scaled");
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_flag("--audit", sim_audit, "run the protocol checkers on the trace");

  // grid: the acceptance-ratio experiment harness for one scenario.
  auto* grid = app.add_subcommand("grid", "run an acceptance-ratio grid");
  ScenarioArgs grid_args;
  std::string grid_modes = "ep,en,fedfp", grid_out = "out";
  int grid_jobs = 1;
  std::size_t grid_cap = kDefaultPathCap;
  bool grid_sim_check = false;
  grid_args.add_to(grid);
  grid->add_option("--modes", grid_modes, "comma-separated: ep,en,fedfp");
  grid->add_option("--out", grid_out, "output directory");
  grid->add_option("--jobs", grid_jobs, "worker threads");
  grid->add_option("--paths-cap", grid_cap, "path enumeration cap");
  grid->add_flag("--sim-check", grid_sim_check,
                 "simulate accepted tasksets and audit the analytic bounds");

  // sweep: the full scenario cross product (216 scenarios), opt-in.
  auto* sweep = app.add_subcommand(
      "sweep", "run the full scenario cross product (long-running)");
  std::string sweep_modes = "ep,en,fedfp", sweep_out = "sweep";
  int sweep_reps = 100, sweep_jobs = 1, sweep_limit = 0;
  std::uint64_t sweep_seed = 1;
  std::size_t sweep_cap = kDefaultPathCap;
  sweep->add_option("--reps", sweep_reps, "tasksets per grid point");
  sweep->add_option("--seed", sweep_seed, "master seed");
  sweep->add_option("--modes", sweep_modes, "comma-separated: ep,en,fedfp");
  sweep->add_option("--jobs", sweep_jobs, "worker threads");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--limit", sweep_limit,
                    "run only the first N scenarios (0 = all 216)");
  sweep->add_option("--paths-cap", sweep_cap, "path enumeration cap");

  // compare: dominance/outperformance across saved result tables.
  auto* compare = app.add_subcommand(
      "compare", "dominance statistics over saved results.csv files");
  std::vector<std::string> compare_files;
  std::string compare_modes = "ep,en,fedfp", compare_out = "-";
  compare->add_option("files", compare_files, "results.csv files")->required();
  compare->add_option("--modes", compare_modes, "modes to compare");
  compare->add_option("--out", compare_out, "stats output (- for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      TaskSet ts = grid_replicate(gen_args.resolve(), gen_point, gen_rep);
      std::string json = taskset_to_json(ts);
      if (gen_out == "-") std::cout << json;
      else write_file(gen_out, json);
      return 0;
    }

    if (validate->parsed()) {
      TaskSet ts = taskset_from_json(read_file(validate_in));
      auto issues = validate_task_set(ts);
      for (const auto& i : issues)
        std::cout << "task " << i.task << ": " << i.code << " (" << i.detail
                  << ")\n";
      if (issues.empty()) std::cout << "valid\n";
      return issues.empty() ? 0 : 1;
    }

    if (analyze->parsed()) {
      TaskSet ts = taskset_from_json(read_file(analyze_in));
      PartitionMode mode = parse_modes(analyze_mode).front();
      auto outcome = partition_and_analyze(ts, mode, analyze_cap);
      std::string report = report_to_json(outcome.report);
      if (analyze_report == "-") std::cout << report;
      else write_file(analyze_report, report);
      if (!analyze_assignment.empty())
        write_file(analyze_assignment, assignment_to_json(outcome.assignment));
      std::cerr << (outcome.schedulable ? "schedulable" : "unschedulable")
                << " after " << outcome.rounds << " round(s)\n";
      return 0;
    }

    if (sim->parsed()) {
      TaskSet ts = taskset_from_json(read_file(sim_in));
      Assignment asg = sim_assignment.empty()
                           ? simulation_assignment(ts)
                           : assignment_from_json(read_file(sim_assignment));
      SimConfig cfg;
      time_ns max_period = 0;
      for (const auto& t : ts.tasks) max_period = std::max(max_period, t.period);
      cfg.horizon = static_cast<time_ns>(
          static_cast<double>(max_period) * sim_horizon_periods);
      cfg.release = sim_release == "sporadic" ? ReleaseModel::sporadic_jitter
                                              : ReleaseModel::synchronous_periodic;
      cfg.exec = sim_exec == "scaled" ? ExecModel::uniform_scaled
                                      : ExecModel::always_wcet;
      cfg.seed = sim_seed;
      SimTrace trace = simulate(ts, asg, cfg);
      std::string ndjson = trace_to_ndjson(trace);
      if (sim_trace == "-") std::cout << ndjson;
      else write_file(sim_trace, ndjson);
      if (!sim_csv.empty()) write_file(sim_csv, trace_to_csv(trace));
      if (sim_audit) {
        auto ceiling = check_priority_ceiling(trace, ts, asg);
        auto blocking = check_single_lower_priority_blocking(trace, ts, asg);
        std::cerr << "ceiling violations: " << ceiling.size()
                  << ", lower-priority blocking violations: " << blocking.size()
                  << "\n";
        if (!ceiling.empty() || !blocking.empty()) return 1;
      }
      return 0;
    }

    if (grid->parsed()) {
      ExperimentConfig cfg;
      cfg.scenario = grid_args.resolve();
      cfg.modes = parse_modes(grid_modes);
      cfg.jobs = grid_jobs;
      cfg.path_cap = grid_cap;
      cfg.sim_check = grid_sim_check;
      std::cerr << "scenario " << cfg.scenario.id() << ": " << cfg.scenario.points
                << " points x " << cfg.scenario.reps << " replicates, "
                << cfg.modes.size() << " mode(s)\n";
      ResultTable table = run_scenario_grid(cfg);
      emit_results(table, grid_out);
      if (cfg.modes.size() >= 2)
        write_file(grid_out + "/dominance.csv",
                   dominance_csv(split_by_scenario(table), cfg.modes));
      write_file(grid_out + "/scenario.kv", cfg.scenario.to_kv());
      std::cerr << "wrote " << grid_out << "/results.csv\n";
      return 0;
    }

    if (sweep->parsed()) {
      auto scenarios = full_scenario_set(sweep_reps, sweep_seed);
      if (sweep_limit > 0 && sweep_limit < static_cast<int>(scenarios.size()))
        scenarios.resize(static_cast<std::size_t>(sweep_limit));
      auto modes = parse_modes(sweep_modes);
      ResultTable combined;
      std::vector<ResultTable> per_scenario;
      int done = 0;
      for (const Scenario& sc : scenarios) {
        ExperimentConfig cfg;
        cfg.scenario = sc;
        cfg.modes = modes;
        cfg.jobs = sweep_jobs;
        cfg.path_cap = sweep_cap;
        ResultTable table = run_scenario_grid(cfg);
        combined.rows.insert(combined.rows.end(), table.rows.begin(),
                             table.rows.end());
        per_scenario.push_back(std::move(table));
        std::cerr << "[" << ++done << "/" << scenarios.size() << "] " << sc.id()
                  << "\n";
      }
      emit_results(combined, sweep_out);
      if (modes.size() >= 2)
        write_file(sweep_out + "/dominance.csv",
                   dominance_csv(per_scenario, modes));
      std::cerr << "wrote " << sweep_out << "/results.csv\n";
      return 0;
    }

    if (compare->parsed()) {
      std::vector<ResultTable> tables;
      for (const auto& file : compare_files) {
        ResultTable table = table_from_csv(read_file(file));
        for (auto& part : split_by_scenario(table)) tables.push_back(std::move(part));
      }
      std::string stats = dominance_csv(tables, parse_modes(compare_modes));
      if (compare_out == "-") std::cout << stats;
      else write_file(compare_out, stats);
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
