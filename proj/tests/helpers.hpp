#pragma once

#include <map>
#include <utility>
#include <vector>

#include "fedlock/assignment.hpp"
#include "fedlock/model.hpp"

namespace fedlock::testing {

inline Task make_chain(int id, int priority, std::vector<time_ns> wcets,
                       time_ns period, time_ns deadline) {
  Task t;
  t.id = id;
  t.priority = priority;
  t.period = period;
  t.deadline = deadline;
  for (time_ns w : wcets) {
    Vertex v;
    v.wcet = w;
    t.vertices.push_back(v);
  }
  for (std::size_t i = 0; i + 1 < wcets.size(); ++i)
    t.edges.emplace_back(static_cast<int>(i), static_cast<int>(i) + 1);
  return t;
}

// Two DAG tasks sharing a semaphore-protected resource 0 (global, hosted
// remotely) while task 10 also uses a private resource 1. Encodes the worked
// four-processor schedule used across the protocol tests: the low-priority
// task's agent holds resource 0 over [1,4); the high-priority task's request
// at t=2 waits, is granted at t=4 and completes at t=7.
struct WorkedPair {
  TaskSet ts;
  Assignment asg;
  int high_task = 10;  // 8-vertex DAG, longest path 10
  int low_task = 20;   // 6-vertex DAG
};

inline WorkedPair make_worked_pair() {
  WorkedPair fp;
  TaskSet& ts = fp.ts;
  ts.m = 4;
  ts.resource_ids = {0, 1};

  Task hi;
  hi.id = 10;
  hi.priority = 2;
  hi.period = 30;
  hi.deadline = 30;
  // Vertices 0..7; WCETs chosen so the longest path 0-4-6-7 has length 10.
  std::vector<time_ns> wcets = {1, 4, 3, 2, 3, 1, 3, 3};
  for (time_ns w : wcets) {
    Vertex v;
    v.wcet = w;
    hi.vertices.push_back(v);
  }
  hi.vertices[1].demands[0] = 1;  // global request after one unit of work
  hi.vertices[2].demands[1] = 1;  // local lock held for two units
  hi.vertices[3].demands[1] = 1;  // waits for the sibling's local lock
  hi.cs_lengths[0] = 3;
  hi.cs_lengths[1] = 2;
  hi.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 5}, {2, 5},
              {3, 6}, {4, 6}, {5, 7}, {6, 7}};

  Task lo;
  lo.id = 20;
  lo.priority = 1;
  lo.period = 40;
  lo.deadline = 40;
  std::vector<time_ns> lo_wcets = {1, 2, 3, 2, 2, 1};
  for (time_ns w : lo_wcets) {
    Vertex v;
    v.wcet = w;
    lo.vertices.push_back(v);
  }
  lo.vertices[2].demands[0] = 1;  // the whole vertex is one critical section
  lo.cs_lengths[0] = 3;
  lo.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 5}, {2, 5}, {3, 5}, {4, 5}};

  ts.tasks = {hi, lo};

  Cluster c_lo;
  c_lo.task = 20;
  c_lo.processors = {0, 1};
  Cluster c_hi;
  c_hi.task = 10;
  c_hi.processors = {2, 3};
  fp.asg.clusters = {c_lo, c_hi};
  fp.asg.placement[0] = 1;  // the shared resource lives on the low task's side
  return fp;
}

}  // namespace fedlock::testing
