#include <algorithm>
#include <set>

#include "doctest.h"
#include "fedlock/json_io.hpp"
#include "fedlock/model.hpp"
#include "fedlock/rng.hpp"
#include "helpers.hpp"

using namespace fedlock;
using fedlock::testing::make_chain;
using fedlock::testing::make_worked_pair;

namespace {

// Brute-force longest path over a materialized enumeration; the independent
// check for the dynamic-programming implementation.
time_ns longest_by_enumeration(const Task& t) {
  auto paths = enumerate_complete_paths(t, 10'000'000);
  REQUIRE(paths.has_value());
  time_ns best = 0;
  for (const auto& p : *paths) best = std::max(best, p.length);
  return best;
}

Task random_dag_task(Rng& rng, int n_vertices, double edge_prob) {
  Task t;
  t.id = 0;
  t.priority = 1;
  t.period = 1'000'000;
  t.deadline = 1'000'000;
  for (int v = 0; v < n_vertices; ++v) {
    Vertex vx;
    vx.wcet = rng.int_in(1, 50);
    t.vertices.push_back(vx);
  }
  for (int a = 0; a < n_vertices; ++a)
    for (int b = a + 1; b < n_vertices; ++b)
      if (rng.real01() < edge_prob) t.edges.emplace_back(a, b);
  return t;
}

}  // namespace

TEST_CASE("single-vertex task has exactly one path") {
  Task t = make_chain(0, 1, {7}, 100, 100);
  auto paths = enumerate_complete_paths(t, 10);
  REQUIRE(paths.has_value());
  CHECK(paths->size() == 1);
  CHECK((*paths)[0].vertices == std::vector<int>{0});
  CHECK((*paths)[0].length == 7);
}

TEST_CASE("diamond has exactly two paths") {
  Task t;
  t.id = 0;
  t.priority = 1;
  t.period = t.deadline = 100;
  for (time_ns w : {1, 2, 3, 4}) {
    Vertex v;
    v.wcet = w;
    t.vertices.push_back(v);
  }
  t.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  auto paths = enumerate_complete_paths(t, 10);
  REQUIRE(paths.has_value());
  CHECK(paths->size() == 2);
}

TEST_CASE("worked pair task: path set and longest path") {
  auto fp = make_worked_pair();
  const Task& hi = *fp.ts.task_by_id(fp.high_task);
  auto paths = enumerate_complete_paths(hi, 100);
  REQUIRE(paths.has_value());
  bool found = false;
  for (const auto& p : *paths)
    if (p.vertices == std::vector<int>{0, 4, 6, 7}) found = true;
  CHECK(found);
  CHECK(longest_path_length(hi) == 10);
}

TEST_CASE("longest path of a chain is the sum") {
  Task t = make_chain(0, 1, {3, 4, 5}, 100, 100);
  CHECK(longest_path_length(t) == 12);
}

TEST_CASE("path overflow signals envelope fallback") {
  // A ladder of diamonds has 2^k paths.
  Task t;
  t.id = 0;
  t.priority = 1;
  t.period = t.deadline = 1000;
  const int k = 12;
  for (int i = 0; i < 3 * k + 1; ++i) {
    Vertex v;
    v.wcet = 1;
    t.vertices.push_back(v);
  }
  for (int i = 0; i < k; ++i) {
    int base = 3 * i;
    t.edges.push_back({base, base + 1});
    t.edges.push_back({base, base + 2});
    t.edges.push_back({base + 1, base + 3});
    t.edges.push_back({base + 2, base + 3});
  }
  CHECK(count_complete_paths(t, 1 << 20) == (1u << k));
  CHECK(!enumerate_complete_paths(t, 100).has_value());
  CHECK(enumerate_complete_paths(t, 1 << 13).has_value());
}

TEST_CASE("longest path equals enumeration maximum on random DAGs") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    Task t = random_dag_task(rng, 50, 0.08);
    time_ns lstar = longest_path_length(t);
    CHECK(lstar == longest_by_enumeration(t));
    // The longest path exhausts the task exactly when the DAG is a chain
    // (one complete path covering every vertex).
    CHECK(lstar <= t.total_wcet());
    auto paths = enumerate_complete_paths(t, 10'000'000);
    bool chain = paths->size() == 1 &&
                 (*paths)[0].vertices.size() == t.vertices.size();
    CHECK((lstar == t.total_wcet()) == chain);
  }
}

TEST_CASE("path request counts") {
  auto fp = make_worked_pair();
  const Task& hi = *fp.ts.task_by_id(fp.high_task);
  auto paths = enumerate_complete_paths(hi, 100);
  REQUIRE(paths.has_value());
  for (const auto& p : *paths) {
    CHECK(path_request_count(p, 0) <= hi.request_count(0));
    CHECK(path_request_count(p, 1) <= hi.request_count(1));
    CHECK(path_request_count(p, 99) == 0);  // unused resource
  }
  // The path through vertex 1 requests the global exactly once.
  bool checked = false;
  for (const auto& p : *paths)
    if (std::find(p.vertices.begin(), p.vertices.end(), 1) != p.vertices.end()) {
      CHECK(path_request_count(p, 0) == 1);
      checked = true;
    }
  CHECK(checked);
}

TEST_CASE("structural totals are consistent") {
  auto fp = make_worked_pair();
  for (const auto& t : fp.ts.tasks) {
    time_ns c = 0;
    for (const auto& v : t.vertices) c += v.wcet;
    CHECK(t.total_wcet() == c);
    CHECK(longest_path_length(t) <= c);
    for (int q : fp.ts.resource_ids) {
      int n = 0;
      for (const auto& v : t.vertices) n += v.demand(q);
      CHECK(t.request_count(q) == n);
    }
  }
}

TEST_CASE("longest path equals total exactly for chains") {
  Task chain = make_chain(0, 1, {2, 3, 4}, 100, 100);
  CHECK(longest_path_length(chain) == chain.total_wcet());
  Task fork;
  fork.id = 0;
  fork.priority = 1;
  fork.period = fork.deadline = 100;
  for (time_ns w : {5, 5}) {
    Vertex v;
    v.wcet = w;
    fork.vertices.push_back(v);
  }
  CHECK(longest_path_length(fork) < fork.total_wcet());
}

TEST_CASE("validation flags constructed violations") {
  TaskSet ts;
  ts.m = 2;
  ts.resource_ids = {0};

  Task cyclic = make_chain(0, 2, {1, 1}, 100, 100);
  cyclic.edges.push_back({1, 0});
  ts.tasks.push_back(cyclic);

  Task late = make_chain(1, 1, {5}, 100, 200);  // deadline beyond period
  ts.tasks.push_back(late);

  Task greedy = make_chain(2, 1, {4}, 100, 100);  // duplicate priority too
  greedy.vertices[0].demands[0] = 3;
  greedy.cs_lengths[0] = 2;  // 3*2 > 4
  ts.tasks.push_back(greedy);

  auto issues = validate_task_set(ts);
  std::set<std::string> codes;
  for (const auto& i : issues) codes.insert(i.code);
  CHECK(codes.count("cycle"));
  CHECK(codes.count("deadline-exceeds-period"));
  CHECK(codes.count("duplicate-priority"));
  CHECK(codes.count("vertex-demand-exceeds-wcet"));
}

TEST_CASE("worked pair passes validation") {
  auto fp = make_worked_pair();
  CHECK(validate_task_set(fp.ts).empty());
}

TEST_CASE("resource scope classification") {
  auto fp = make_worked_pair();
  CHECK(fp.ts.is_global(0));
  CHECK(!fp.ts.is_global(1));
  auto spec1 = fp.ts.resource_spec(1);
  CHECK(spec1.owner_task == fp.high_task);
  CHECK(fp.ts.ceiling_base(0) == 2);
}

TEST_CASE("taskset JSON round-trip is lossless") {
  auto fp = make_worked_pair();
  fp.ts.meta["seed"] = "12345";
  std::string once = taskset_to_json(fp.ts);
  TaskSet back = taskset_from_json(once);
  std::string twice = taskset_to_json(back);
  CHECK(once == twice);
  CHECK(back.m == fp.ts.m);
  CHECK(back.tasks.size() == fp.ts.tasks.size());
  CHECK(back.task_by_id(10)->cs_lengths == fp.ts.task_by_id(10)->cs_lengths);
  CHECK(back.meta.at("seed") == "12345");
}

TEST_CASE("assignment JSON round-trip") {
  auto fp = make_worked_pair();
  std::string once = assignment_to_json(fp.asg);
  Assignment back = assignment_from_json(once);
  CHECK(assignment_to_json(back) == once);
  CHECK(back.host_of(0) == 1);
  CHECK(back.cluster_of(10)->processors == std::vector<int>{2, 3});
}
