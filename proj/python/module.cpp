#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fedlock/experiment.hpp"
#include "fedlock/generator.hpp"
#include "fedlock/json_io.hpp"
#include "fedlock/partitioning.hpp"
#include "fedlock/simulator.hpp"

namespace py = pybind11;
using namespace fedlock;

namespace {

Scenario scenario_from_kwargs(int m, std::pair<int, int> nr, double uavg,
                              double pr, int nmax,
                              std::pair<long long, long long> lrange_us,
                              int points, int reps, std::uint64_t seed) {
  Scenario sc;
  sc.m = m;
  sc.nr_lo = nr.first;
  sc.nr_hi = nr.second;
  sc.u_avg = uavg;
  sc.p_r = pr;
  sc.n_hi = nmax;
  sc.l_lo = lrange_us.first * kMicrosecond;
  sc.l_hi = lrange_us.second * kMicrosecond;
  sc.points = points;
  sc.reps = reps;
  sc.seed = seed;
  return sc;
}

PartitionMode mode_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(::tolower(c)));
  if (s == "ep") return PartitionMode::dpcp_ep;
  if (s == "en") return PartitionMode::dpcp_en;
  if (s == "fedfp" || s == "fed-fp") return PartitionMode::fed_fp;
  throw std::invalid_argument("unknown mode: " + name);
}

}  // namespace

PYBIND11_MODULE(fedlock, m) {
  m.doc() = "Schedulability analysis, partitioning and simulation for parallel "
            "DAG tasks with distributed priority-ceiling locking";

  py::class_<Scenario>(m, "Scenario")
      .def(py::init(&scenario_from_kwargs), py::arg("m") = 8,
           py::arg("nr") = std::make_pair(2, 4), py::arg("uavg") = 1.5,
           py::arg("pr") = 0.5, py::arg("nmax") = 25,
           py::arg("lrange_us") = std::make_pair(15LL, 50LL),
           py::arg("points") = 20, py::arg("reps") = 100, py::arg("seed") = 1)
      .def_readwrite("m", &Scenario::m)
      .def_readwrite("points", &Scenario::points)
      .def_readwrite("reps", &Scenario::reps)
      .def_readwrite("seed", &Scenario::seed)
      .def("id", &Scenario::id)
      .def("utilization_grid", &Scenario::utilization_grid)
      .def("__repr__", [](const Scenario& sc) { return "Scenario(" + sc.id() + ")"; });

  py::class_<TaskSet>(m, "TaskSet")
      .def_property_readonly("m", [](const TaskSet& ts) { return ts.m; })
      .def_property_readonly("n_tasks",
                             [](const TaskSet& ts) { return ts.tasks.size(); })
      .def_property_readonly("resources",
                             [](const TaskSet& ts) { return ts.resource_ids; })
      .def("total_utilization", &TaskSet::total_utilization)
      .def("to_json", &taskset_to_json)
      .def_static("from_json", &taskset_from_json)
      .def("__repr__", [](const TaskSet& ts) {
        return "TaskSet(m=" + std::to_string(ts.m) +
               ", tasks=" + std::to_string(ts.tasks.size()) + ")";
      });

  py::class_<Assignment>(m, "Assignment")
      .def("to_json", &assignment_to_json)
      .def_static("from_json", &assignment_from_json)
      .def("host_of", &Assignment::host_of);

  py::class_<TaskAnalysis>(m, "TaskAnalysis")
      .def_readonly("task", &TaskAnalysis::task)
      .def_readonly("wcrt", &TaskAnalysis::wcrt)
      .def_readonly("schedulable", &TaskAnalysis::schedulable);

  py::class_<WcrtReport>(m, "WcrtReport")
      .def_readonly("schedulable", &WcrtReport::schedulable)
      .def_readonly("tasks", &WcrtReport::tasks)
      .def("to_json", &report_to_json);

  py::class_<PartitionOutcome>(m, "PartitionOutcome")
      .def_readonly("schedulable", &PartitionOutcome::schedulable)
      .def_readonly("rounds", &PartitionOutcome::rounds)
      .def_readonly("assignment", &PartitionOutcome::assignment)
      .def_readonly("report", &PartitionOutcome::report);

  py::class_<SimTrace>(m, "SimTrace")
      .def_property_readonly("n_events",
                             [](const SimTrace& t) { return t.events.size(); })
      .def("responses",
           [](const SimTrace& t) {
             std::vector<std::tuple<int, int, time_ns>> out;
             for (const auto& j : t.jobs)
               out.emplace_back(j.task, j.job, j.finish - j.release);
             return out;
           })
      .def("to_ndjson", &trace_to_ndjson)
      .def("to_csv", &trace_to_csv);

  m.def("validate", [](const TaskSet& ts) {
    std::vector<std::string> out;
    for (const auto& i : validate_task_set(ts))
      out.push_back("task " + std::to_string(i.task) + ": " + i.code);
    return out;
  });

  m.def("generate",
        [](const Scenario& sc, int point, int rep) {
          return grid_replicate(sc, point, rep);
        },
        py::arg("scenario"), py::arg("point"), py::arg("rep") = 0,
        "Deterministic task set for one grid replicate");

  m.def("analyze",
        [](const TaskSet& ts, const std::string& mode, std::size_t path_cap) {
          return partition_and_analyze(ts, mode_from_string(mode), path_cap);
        },
        py::arg("taskset"), py::arg("mode") = "ep",
        py::arg("path_cap") = kDefaultPathCap,
        "Partition processors and resources, then bound every response time");

  m.def("simulate",
        [](const TaskSet& ts, const Assignment& asg, double horizon_periods,
           const std::string& exec, std::uint64_t seed) {
          SimConfig cfg;
          time_ns max_period = 0;
          for (const auto& t : ts.tasks)
            max_period = std::max(max_period, t.period);
          cfg.horizon = static_cast<time_ns>(
              static_cast<double>(max_period) * horizon_periods);
          cfg.exec = exec == "scaled" ? ExecModel::uniform_scaled
                                      : ExecModel::always_wcet;
          cfg.seed = seed;
          return simulate(ts, asg, cfg);
        },
        py::arg("taskset"), py::arg("assignment"),
        py::arg("horizon_periods") = 2.0, py::arg("exec") = "wcet",
        py::arg("seed") = 0);

  m.def("simulation_assignment", &simulation_assignment, py::arg("taskset"),
        py::arg("path_cap") = kDefaultPathCap);

  m.def("check_priority_ceiling",
        [](const SimTrace& trace, const TaskSet& ts, const Assignment& asg) {
          return check_priority_ceiling(trace, ts, asg).size();
        });
  m.def("check_single_lower_priority_blocking",
        [](const SimTrace& trace, const TaskSet& ts, const Assignment& asg) {
          return check_single_lower_priority_blocking(trace, ts, asg).size();
        });
  m.def("check_response_bounds",
        [](const SimTrace& trace, const PartitionOutcome& outcome,
           const TaskSet& ts) {
          return check_response_bounds(trace, outcome.report, ts).size();
        });

  m.def("run_grid",
        [](const Scenario& sc, const std::vector<std::string>& modes, int jobs,
           const std::string& out_dir) {
          ExperimentConfig cfg;
          cfg.scenario = sc;
          cfg.modes.clear();
          for (const auto& name : modes) cfg.modes.push_back(mode_from_string(name));
          cfg.jobs = jobs;
          ResultTable table = run_scenario_grid(cfg);
          if (!out_dir.empty()) emit_results(table, out_dir);
          return table_to_csv(table);
        },
        py::arg("scenario"),
        py::arg("modes") = std::vector<std::string>{"ep", "en", "fedfp"},
        py::arg("jobs") = 1, py::arg("out_dir") = "",
        "Run the acceptance-ratio grid and return the CSV");

  m.def("longest_path_length", [](const TaskSet& ts, int task) {
    const Task* t = ts.task_by_id(task);
    if (!t) throw std::out_of_range("unknown task");
    return longest_path_length(*t);
  });
}
