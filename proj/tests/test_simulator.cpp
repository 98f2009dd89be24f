#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "fedlock/generator.hpp"
#include "fedlock/partitioning.hpp"
#include "fedlock/simulator.hpp"
#include "helpers.hpp"

using namespace fedlock;
using fedlock::testing::make_chain;
using fedlock::testing::make_worked_pair;

namespace {

constexpr time_ns us = kMicrosecond;
constexpr time_ns ms = kMillisecond;

bool has_event(const SimTrace& trace, EventKind kind, time_ns t, int task,
               int resource = -1) {
  for (const auto& e : trace.events)
    if (e.kind == kind && e.time == t && e.task == task &&
        (resource < 0 || e.resource == resource))
      return true;
  return false;
}

}  // namespace

TEST_CASE("chain task runs for exactly its execution time") {
  TaskSet ts;
  ts.m = 1;
  ts.resource_ids = {};
  ts.tasks = {make_chain(0, 1, {3 * ms, 4 * ms, 5 * ms}, 100 * ms, 100 * ms)};
  Assignment asg;
  asg.clusters = {Cluster{0, {0}}};
  SimConfig cfg;
  cfg.horizon = 100 * ms;
  SimTrace trace = simulate(ts, asg, cfg);
  REQUIRE(trace.jobs.size() == 1);
  CHECK(trace.jobs[0].finish - trace.jobs[0].release == 12 * ms);
}

TEST_CASE("worked pair: narrated protocol timeline") {
  auto fp = make_worked_pair();
  SimConfig cfg;
  cfg.horizon = 40;
  SimTrace trace = simulate(fp.ts, fp.asg, cfg);

  // The low task's agent releases the shared resource at t=4.
  CHECK(has_event(trace, EventKind::lock_release, 4, fp.low_task, 0));
  // The high task's request, issued at t=2, is granted at t=4 and its agent
  // completes at t=7.
  CHECK(has_event(trace, EventKind::lock_request, 2, fp.high_task, 0));
  CHECK(has_event(trace, EventKind::lock_grant, 4, fp.high_task, 0));
  CHECK(has_event(trace, EventKind::agent_end, 7, fp.high_task, 0));
  // The local resource inside the high task: vertex 2 grabs it at t=2 and
  // vertex 3 waits until the release at t=4.
  CHECK(has_event(trace, EventKind::lock_grant, 2, fp.high_task, 1));
  CHECK(has_event(trace, EventKind::lock_release, 4, fp.high_task, 1));
  CHECK(has_event(trace, EventKind::lock_grant, 4, fp.high_task, 1));

  CHECK(check_priority_ceiling(trace, fp.ts, fp.asg).empty());
  CHECK(check_single_lower_priority_blocking(trace, fp.ts, fp.asg).empty());
}

TEST_CASE("two agents: one lower-priority blocking interval") {
  // The low task locks first; the high task's request waits exactly once.
  TaskSet ts;
  ts.m = 2;
  ts.resource_ids = {0};
  Task hi = make_chain(0, 2, {2 * us, 10 * us}, 1000 * us, 1000 * us);
  hi.vertices[1].demands[0] = 1;
  hi.cs_lengths[0] = 3 * us;
  // The whole low vertex is one critical section held over [0, 8).
  Task lo = make_chain(1, 1, {8 * us}, 2000 * us, 2000 * us);
  lo.vertices[0].demands[0] = 1;
  lo.cs_lengths[0] = 8 * us;
  ts.tasks = {hi, lo};
  Assignment asg;
  asg.clusters = {Cluster{0, {0}}, Cluster{1, {1}}};
  asg.placement[0] = 1;
  SimConfig cfg;
  cfg.horizon = 2000 * us;
  SimTrace trace = simulate(ts, asg, cfg);

  CHECK(check_single_lower_priority_blocking(trace, ts, asg).empty());
  // The high request really did wait for the lower one.
  time_ns t_req = -1, t_grant = -1;
  for (const auto& e : trace.events) {
    if (e.task != 0 || e.resource != 0) continue;
    if (e.kind == EventKind::lock_request && t_req < 0) t_req = e.time;
    if (e.kind == EventKind::lock_grant && t_grant < 0) t_grant = e.time;
  }
  CHECK(t_req >= 0);
  CHECK(t_grant > t_req);
}

TEST_CASE("three agents: ceiling keeps the blocking to one section") {
  // LO holds u1 (low ceiling), MID is granted u2 (high ceiling) and preempts,
  // HI's request then waits on exactly one lower-priority section.
  TaskSet ts;
  ts.m = 3;
  ts.resource_ids = {0, 1, 2};  // 0 = q, 1 = u1, 2 = u2
  Task hi = make_chain(2, 3, {3 * us, 20 * us}, 1000 * us, 1000 * us);
  hi.vertices[1].demands[0] = 1;
  hi.cs_lengths[0] = 4 * us;
  hi.vertices[1].demands[2] = 1;  // raises u2's ceiling to HI
  hi.cs_lengths[2] = 2 * us;
  Task mid = make_chain(1, 2, {2 * us, 20 * us}, 2000 * us, 2000 * us);
  mid.vertices[1].demands[2] = 1;
  mid.cs_lengths[2] = 3 * us;
  Task lo = make_chain(0, 1, {10 * us, 30 * us}, 4000 * us, 4000 * us);
  lo.vertices[0].demands[1] = 1;
  lo.cs_lengths[1] = 10 * us;
  // Second users so that every resource is global.
  lo.vertices[1].demands[0] = 1;
  lo.cs_lengths[0] = 2 * us;
  mid.vertices[0].demands[1] = 1;
  mid.cs_lengths[1] = 1 * us;
  ts.tasks = {hi, mid, lo};
  Assignment asg;
  asg.clusters = {Cluster{0, {0}}, Cluster{1, {1}}, Cluster{2, {2}}};
  asg.placement[0] = 0;
  asg.placement[1] = 0;
  asg.placement[2] = 0;
  SimConfig cfg;
  cfg.horizon = 4000 * us;
  SimTrace trace = simulate(ts, asg, cfg);
  CHECK(check_single_lower_priority_blocking(trace, ts, asg).empty());
  CHECK(check_priority_ceiling(trace, ts, asg).empty());
}

TEST_CASE("agents preempt lower-priority agents, keeping blocking single") {
  // A low-ceiling section held by LO, a high-ceiling grant to MID while LO
  // executes, then HI's request. If agents ran to completion regardless of
  // priority, HI would sit behind both LO's tail and MID's whole section;
  // priority-ordered agent scheduling bounds it to one lower-priority hold.
  TaskSet ts;
  ts.m = 4;
  ts.resource_ids = {0, 1, 2};  // 0 = HI's target, 1 = low ceiling, 2 = high
  auto vertex = [](time_ns wcet) {
    Vertex v;
    v.wcet = wcet;
    return v;
  };
  Task hi;
  hi.id = 0;
  hi.priority = 4;
  hi.period = hi.deadline = 100000;
  hi.vertices = {vertex(9), vertex(51)};
  hi.edges = {{0, 1}};
  hi.vertices[0].demands[0] = 1;
  hi.cs_lengths[0] = 5;
  hi.vertices[1].demands[2] = 1;  // raises resource 2's ceiling to HI
  hi.cs_lengths[2] = 1;
  Task mid;
  mid.id = 1;
  mid.priority = 3;
  mid.period = mid.deadline = 100000;
  mid.vertices = {vertex(5)};
  mid.vertices[0].demands[2] = 1;
  mid.cs_lengths[2] = 3;
  Task lo;
  lo.id = 2;
  lo.priority = 2;
  lo.period = lo.deadline = 100000;
  lo.vertices = {vertex(10)};
  lo.vertices[0].demands[1] = 1;
  lo.cs_lengths[1] = 10;
  Task lo2;  // second user keeping resources 0 and 1 shared; acts late
  lo2.id = 3;
  lo2.priority = 1;
  lo2.period = lo2.deadline = 100000;
  lo2.vertices = {vertex(201), vertex(201)};
  lo2.edges = {{0, 1}};
  lo2.vertices[0].demands[1] = 1;
  lo2.cs_lengths[1] = 1;
  lo2.vertices[1].demands[0] = 1;
  lo2.cs_lengths[0] = 1;
  ts.tasks = {hi, mid, lo, lo2};
  Assignment asg;
  asg.clusters = {Cluster{0, {0}}, Cluster{1, {1}}, Cluster{2, {2}},
                  Cluster{3, {3}}};
  asg.placement[0] = 3;
  asg.placement[1] = 3;
  asg.placement[2] = 3;
  SimConfig cfg;
  cfg.horizon = 100000;
  SimTrace trace = simulate(ts, asg, cfg);

  // MID's agent displaces LO's at t=1 and finishes at t=4, after which HI is
  // granted immediately; only MID's section overlapped the wait.
  time_ns hi_grant = -1;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::lock_grant && e.task == 0 && e.resource == 0 &&
        hi_grant < 0)
      hi_grant = e.time;
  CHECK(hi_grant == 4);
  CHECK(check_single_lower_priority_blocking(trace, ts, asg).empty());
  CHECK(check_priority_ceiling(trace, ts, asg).empty());
}

TEST_CASE("mutated trace fails the checkers") {
  auto fp = make_worked_pair();
  SimConfig cfg;
  cfg.horizon = 40;
  SimTrace trace = simulate(fp.ts, fp.asg, cfg);

  // Move the low task's release of the shared resource past the grant, so
  // the replayed grant happens under a raised ceiling.
  SimTrace mutated = trace;
  for (auto& e : mutated.events)
    if (e.kind == EventKind::lock_release && e.task == fp.low_task &&
        e.resource == 0)
      e.time = 30;
  std::stable_sort(mutated.events.begin(), mutated.events.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; });
  CHECK(!check_priority_ceiling(mutated, fp.ts, fp.asg).empty());
}

TEST_CASE("trace invariants: mutual exclusion and release ordering") {
  Scenario sc;
  sc.m = 8;
  sc.nr_lo = 2;
  sc.nr_hi = 4;
  sc.u_avg = 1.5;
  sc.p_r = 1.0;
  sc.n_hi = 10;
  sc.seed = 4711;
  for (int rep = 0; rep < 5; ++rep) {
    TaskSet ts = grid_replicate(sc, 11, rep);
    Assignment asg = simulation_assignment(ts);
    SimConfig cfg;
    time_ns max_period = 0;
    for (const auto& t : ts.tasks) max_period = std::max(max_period, t.period);
    cfg.horizon = max_period + 1;
    SimTrace trace = simulate(ts, asg, cfg);

    // Critical sections of one resource never overlap: the lock state
    // alternates grant/release per resource.
    std::map<int, int> held;
    for (const auto& e : trace.events) {
      if (e.kind == EventKind::lock_grant) {
        CHECK(held[e.resource] == 0);
        held[e.resource] = 1;
      } else if (e.kind == EventKind::lock_release) {
        CHECK(held[e.resource] == 1);
        held[e.resource] = 0;
      }
    }
    // Every grant eventually released.
    for (const auto& [q, h] : held) CHECK(h == 0);

    // A global release is followed at the same instant by the owner's
    // re-entry into the ready queue.
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& e = trace.events[i];
      if (e.kind != EventKind::lock_release || asg.host_of(e.resource) < 0)
        continue;
      bool requeued = false;
      for (std::size_t j = i + 1; j < trace.events.size() &&
                                  trace.events[j].time == e.time;
           ++j) {
        const auto& f = trace.events[j];
        if (f.kind == EventKind::resume && f.task == e.task && f.job == e.job &&
            f.vertex == e.vertex) {
          requeued = true;
          break;
        }
      }
      CHECK(requeued);
    }

    // Agents execute only on the processor hosting their resource.
    for (const auto& e : trace.events)
      if (e.kind == EventKind::agent_start || e.kind == EventKind::agent_end)
        CHECK(e.processor == asg.host_of(e.resource));
  }
}

TEST_CASE("simulation is deterministic") {
  Scenario sc;
  sc.m = 8;
  sc.nr_lo = 2;
  sc.nr_hi = 4;
  sc.u_avg = 1.5;
  sc.p_r = 0.5;
  sc.n_hi = 25;
  sc.seed = 835;
  TaskSet ts = grid_replicate(sc, 10, 1);
  Assignment asg = simulation_assignment(ts);
  SimConfig cfg;
  time_ns max_period = 0;
  for (const auto& t : ts.tasks) max_period = std::max(max_period, t.period);
  cfg.horizon = 2 * max_period;
  cfg.exec = ExecModel::uniform_scaled;
  cfg.seed = 99;
  SimTrace a = simulate(ts, asg, cfg);
  SimTrace b = simulate(ts, asg, cfg);
  CHECK(trace_to_ndjson(a) == trace_to_ndjson(b));
  cfg.seed = 100;
  SimTrace c = simulate(ts, asg, cfg);
  CHECK(trace_to_ndjson(a) != trace_to_ndjson(c));

  // Sporadic releases: deterministic per seed, jittered no earlier than the
  // period.
  cfg.release = ReleaseModel::sporadic_jitter;
  cfg.seed = 99;
  SimTrace d = simulate(ts, asg, cfg);
  SimTrace e = simulate(ts, asg, cfg);
  CHECK(trace_to_ndjson(d) == trace_to_ndjson(e));
  std::map<int, time_ns> last_release;
  for (const auto& ev : d.events) {
    if (ev.kind != EventKind::release) continue;
    auto it = last_release.find(ev.task);
    if (it != last_release.end())
      CHECK(ev.time - it->second >= ts.task_by_id(ev.task)->period);
    last_release[ev.task] = ev.time;
  }
}

TEST_CASE("deadline misses are recorded, not fatal") {
  TaskSet ts;
  ts.m = 1;
  ts.resource_ids = {};
  // A chain longer than its deadline.
  Task t = make_chain(0, 1, {6 * ms, 6 * ms}, 20 * ms, 10 * ms);
  ts.tasks = {t};
  Assignment asg;
  asg.clusters = {Cluster{0, {0}}};
  SimConfig cfg;
  cfg.horizon = 20 * ms;
  SimTrace trace = simulate(ts, asg, cfg);
  bool missed = false;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::deadline_miss) missed = true;
  CHECK(missed);
  REQUIRE(!trace.jobs.empty());
  CHECK(trace.jobs[0].finish == 12 * ms);
}

TEST_CASE("inconsistent assignments are rejected") {
  auto fp = make_worked_pair();
  SimConfig cfg;
  cfg.horizon = 40;

  Assignment missing = fp.asg;
  missing.placement.clear();  // unplaced global
  CHECK_THROWS_AS(simulate(fp.ts, missing, cfg), std::invalid_argument);

  Assignment overlap = fp.asg;
  overlap.clusters[1].processors = {1, 2};  // processor 1 used twice
  CHECK_THROWS_AS(simulate(fp.ts, overlap, cfg), std::invalid_argument);

  SimConfig small = cfg;
  small.horizon = 10;  // below the largest period
  CHECK_THROWS_AS(simulate(fp.ts, fp.asg, small), std::invalid_argument);
}

TEST_CASE("responses stay within analyzed bounds on a schedulable set") {
  Scenario sc;
  sc.m = 8;
  sc.nr_lo = 2;
  sc.nr_hi = 4;
  sc.u_avg = 1.5;
  sc.p_r = 0.5;
  sc.n_hi = 25;
  sc.seed = 60601;
  int audited = 0;
  for (int rep = 0; rep < 10 && audited < 4; ++rep) {
    TaskSet ts = grid_replicate(sc, 8, rep);
    auto outcome = partition_and_analyze(ts, PartitionMode::dpcp_ep);
    if (!outcome.schedulable) continue;
    ++audited;
    SimConfig cfg;
    time_ns max_period = 0;
    for (const auto& t : ts.tasks) max_period = std::max(max_period, t.period);
    cfg.horizon = 2 * max_period;
    for (ExecModel exec : {ExecModel::always_wcet, ExecModel::uniform_scaled}) {
      cfg.exec = exec;
      cfg.seed = 7;
      SimTrace trace = simulate(ts, outcome.assignment, cfg);
      CHECK(check_response_bounds(trace, outcome.report, ts).empty());
    }
  }
  CHECK(audited > 0);
}
