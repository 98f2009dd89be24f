#include "fedlock/simulator.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fedlock/partitioning.hpp"
#include "fedlock/rng.hpp"

namespace fedlock {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::release: return "release";
    case EventKind::dispatch: return "dispatch";
    case EventKind::preempt: return "preempt";
    case EventKind::lock_request: return "lock-request";
    case EventKind::lock_grant: return "lock-grant";
    case EventKind::lock_release: return "lock-release";
    case EventKind::agent_start: return "agent-start";
    case EventKind::agent_end: return "agent-end";
    case EventKind::suspend: return "suspend";
    case EventKind::resume: return "resume";
    case EventKind::job_finish: return "job-finish";
    case EventKind::deadline_miss: return "deadline-miss";
  }
  return "?";
}

namespace {

struct Piece {
  time_ns exec = 0;   // non-critical chunk executed before the request
  int resource = -1;  // requested after the chunk; -1 on the final piece
  time_ns cs = 0;     // critical-section length of that request
};

struct VKey {
  int job = -1;
  int vertex = -1;
};

enum class VState {
  waiting_preds,
  ready_n,
  ready_l,
  running,
  suspended,
  done,
};

struct JobRt {
  int task_id = -1;
  int job_index = 0;
  time_ns release = 0;
  std::vector<std::vector<Piece>> plan;
  std::vector<int> preds_left;
  std::vector<std::size_t> piece;
  std::vector<time_ns> exec_left;  // remaining chunk or local CS time
  std::vector<VState> state;
  std::vector<std::uint8_t> in_cs;  // executing a local critical section
  int vertices_left = 0;
  time_ns finish = -1;
};

enum class AgentState { waiting, ready, running, finished };

struct AgentRt {
  int task_id = -1;
  int priority = 0;
  int job = -1;
  int vertex = -1;
  int resource = -1;
  int host = -1;
  time_ns cs_left = 0;
  AgentState state = AgentState::waiting;
};

struct ResRt {
  bool global = false;
  int host = -1;
  bool locked = false;
  int holder_agent = -1;
  VKey holder_vertex;
  std::deque<VKey> waiters;  // local FIFO
};

enum class RunKind { idle, vertex, agent };

struct ProcRt {
  int owner_task = -1;
  RunKind run = RunKind::idle;
  VKey v;
  int agent = -1;
  time_ns busy_until = 0;
};

struct TaskQueues {
  std::deque<VKey> rq_n;
  std::deque<VKey> rq_l;
};

struct HeapEntry {
  time_ns time = 0;
  int kind = 0;  // 0 release, 1 wakeup, 2 deadline check
  int a = 0;     // task index / processor / job index
  int b = 0;     // job index for releases
  bool operator>(const HeapEntry& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    if (a != o.a) return a > o.a;
    return b > o.b;
  }
};

class Engine {
 public:
  Engine(const TaskSet& ts, const Assignment& asg, const SimConfig& cfg)
      : ts_(ts), asg_(asg), cfg_(cfg) {
    validate_inputs();
    build_platform();
    build_release_schedule();
  }

  SimTrace run() {
    std::uint64_t budget = 200'000'000;
    while (!heap_.empty()) {
      time_ns t = heap_.top().time;
      std::vector<HeapEntry> due;
      while (!heap_.empty() && heap_.top().time == t) {
        due.push_back(heap_.top());
        heap_.pop();
      }
      std::sort(due.begin(), due.end(), [&](const HeapEntry& x, const HeapEntry& y) {
        if (x.kind != y.kind) return x.kind < y.kind;
        if (x.kind == 0) {  // releases: higher priority first, then task id
          int px = ts_.tasks[static_cast<std::size_t>(x.a)].priority;
          int py = ts_.tasks[static_cast<std::size_t>(y.a)].priority;
          if (px != py) return px > py;
        }
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
      });
      for (const auto& e : due)
        if (e.kind == 0) release_job(t, e.a, e.b);

      bool progress = true;
      while (progress) {
        if (budget-- == 0) throw std::runtime_error("simulation action budget exceeded");
        progress = false;
        progress |= do_completions(t);
        progress |= do_grants(t);
        progress |= do_dispatch(t);
      }

      for (const auto& e : due)
        if (e.kind == 2 && jobs_[e.a].finish < 0)
          emit(t, EventKind::deadline_miss, jobs_[e.a].task_id, jobs_[e.a].job_index);

      assert_work_conserving(t);
    }
    SimTrace trace;
    trace.events = std::move(events_);
    for (const auto& j : jobs_)
      trace.jobs.push_back({j.task_id, j.job_index, j.release, j.finish});
    std::sort(trace.jobs.begin(), trace.jobs.end(), [](const JobStat& a, const JobStat& b) {
      if (a.task != b.task) return a.task < b.task;
      return a.job < b.job;
    });
    return trace;
  }

 private:
  const TaskSet& ts_;
  const Assignment& asg_;
  const SimConfig& cfg_;

  std::vector<ProcRt> procs_;
  std::map<int, ResRt> resources_;
  std::map<int, TaskQueues> queues_;             // task id -> queues
  std::map<int, std::vector<int>> hosted_;       // processor -> global ids
  std::vector<JobRt> jobs_;
  std::vector<AgentRt> agents_;
  std::map<int, std::vector<int>> sqg_, rqg_;    // processor -> agent indices
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
  std::vector<SimEvent> events_;

  const Task& task_of(const JobRt& j) const { return *ts_.task_by_id(j.task_id); }

  void emit(time_ns t, EventKind kind, int task = -1, int job = -1,
            int vertex = -1, int resource = -1, int processor = -1) {
    events_.push_back({t, kind, task, job, vertex, resource, processor});
  }

  void validate_inputs() {
    if (!validate_task_set(ts_).empty())
      throw std::invalid_argument("simulate: invalid task set");
    std::set<int> seen_procs;
    std::set<int> seen_tasks;
    for (const auto& c : asg_.clusters) {
      if (!ts_.task_by_id(c.task))
        throw std::invalid_argument("simulate: cluster for unknown task");
      if (!seen_tasks.insert(c.task).second)
        throw std::invalid_argument("simulate: duplicate cluster");
      if (c.processors.empty())
        throw std::invalid_argument("simulate: empty cluster");
      for (int p : c.processors) {
        if (p < 0 || p >= ts_.m)
          throw std::invalid_argument("simulate: processor out of range");
        if (!seen_procs.insert(p).second)
          throw std::invalid_argument("simulate: overlapping clusters");
      }
    }
    for (const auto& t : ts_.tasks)
      if (!seen_tasks.count(t.id))
        throw std::invalid_argument("simulate: task without a cluster");
    for (int q : ts_.resource_ids) {
      if (ts_.is_global(q)) {
        int host = asg_.host_of(q);
        if (host < 0 || host >= ts_.m)
          throw std::invalid_argument("simulate: unplaced global resource");
      }
    }
    time_ns max_period = 0;
    for (const auto& t : ts_.tasks) max_period = std::max(max_period, t.period);
    if (cfg_.horizon < max_period)
      throw std::invalid_argument("simulate: horizon below the largest period");
  }

  void build_platform() {
    procs_.resize(static_cast<std::size_t>(ts_.m));
    for (const auto& c : asg_.clusters)
      for (int p : c.processors) procs_[static_cast<std::size_t>(p)].owner_task = c.task;
    for (int q : ts_.resource_ids) {
      ResRt r;
      r.global = ts_.is_global(q);
      r.host = r.global ? asg_.host_of(q) : -1;
      resources_[q] = r;
      if (r.global) hosted_[r.host].push_back(q);
    }
    for (auto& [p, lst] : hosted_) std::sort(lst.begin(), lst.end());
    for (const auto& t : ts_.tasks) queues_[t.id];
  }

  void build_release_schedule() {
    for (std::size_t i = 0; i < ts_.tasks.size(); ++i) {
      const Task& t = ts_.tasks[i];
      Rng rng(derive_seed(cfg_.seed, {0xA11C0DEULL, static_cast<std::uint64_t>(t.id)}));
      time_ns at = 0;
      int job = 0;
      while (at < cfg_.horizon) {
        heap_.push({at, 0, static_cast<int>(i), job});
        time_ns gap = t.period;
        if (cfg_.release == ReleaseModel::sporadic_jitter) {
          time_ns max_jitter = static_cast<time_ns>(
              static_cast<double>(t.period) * cfg_.jitter_frac);
          gap += max_jitter > 0 ? rng.int_in(0, max_jitter) : 0;
        }
        at += gap;
        ++job;
      }
    }
  }

  std::vector<Piece> build_plan(const Task& t, int v, double scale) const {
    const Vertex& vx = t.vertices[static_cast<std::size_t>(v)];
    std::vector<std::pair<int, time_ns>> reqs;
    for (const auto& [q, n] : vx.demands) {
      time_ns len = t.cs_length(q);
      if (cfg_.exec == ExecModel::uniform_scaled)
        len = std::max<time_ns>(1, static_cast<time_ns>(
                                       static_cast<double>(len) * scale));
      for (int r = 0; r < n; ++r) reqs.emplace_back(q, len);
    }
    time_ns noncrit = t.vertex_noncritical(static_cast<std::size_t>(v));
    if (cfg_.exec == ExecModel::uniform_scaled)
      noncrit = static_cast<time_ns>(static_cast<double>(noncrit) * scale);

    const std::size_t chunks = reqs.size() + 1;
    std::vector<Piece> plan(chunks);
    // Front-loaded split of the non-critical time around the requests.
    time_ns prev = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      time_ns upto = ceil_div(noncrit * static_cast<time_ns>(c + 1),
                              static_cast<time_ns>(chunks));
      plan[c].exec = upto - prev;
      prev = upto;
      if (c < reqs.size()) {
        plan[c].resource = reqs[c].first;
        plan[c].cs = reqs[c].second;
      }
    }
    return plan;
  }

  void release_job(time_ns t, int task_index, int job_index) {
    const Task& task = ts_.tasks[static_cast<std::size_t>(task_index)];
    JobRt j;
    j.task_id = task.id;
    j.job_index = job_index;
    j.release = t;
    double scale = 1.0;
    if (cfg_.exec == ExecModel::uniform_scaled) {
      Rng rng(derive_seed(cfg_.seed, {0x5CA1EULL, static_cast<std::uint64_t>(task.id),
                                      static_cast<std::uint64_t>(job_index)}));
      scale = cfg_.scale_lo + (1.0 - cfg_.scale_lo) * rng.real01();
    }
    const std::size_t n = task.vertices.size();
    j.plan.resize(n);
    for (std::size_t v = 0; v < n; ++v)
      j.plan[v] = build_plan(task, static_cast<int>(v), scale);
    j.preds_left.assign(n, 0);
    for (const auto& [p, s] : task.edges) {
      (void)p;
      ++j.preds_left[static_cast<std::size_t>(s)];
    }
    j.piece.assign(n, 0);
    j.exec_left.assign(n, 0);
    j.state.assign(n, VState::waiting_preds);
    j.in_cs.assign(n, 0);
    j.vertices_left = static_cast<int>(n);
    for (std::size_t v = 0; v < n; ++v) j.exec_left[v] = j.plan[v][0].exec;

    int idx = static_cast<int>(jobs_.size());
    jobs_.push_back(std::move(j));
    emit(t, EventKind::release, task.id, job_index);
    heap_.push({t + task.deadline, 2, idx, 0});
    for (std::size_t v = 0; v < n; ++v) {
      if (jobs_[static_cast<std::size_t>(idx)].preds_left[v] == 0) {
        jobs_[static_cast<std::size_t>(idx)].state[v] = VState::ready_n;
        queues_[task.id].rq_n.push_back({idx, static_cast<int>(v)});
      }
    }
  }

  int priority_of(int task_id) const { return ts_.task_by_id(task_id)->priority; }

  // Highest-priority ready agent on a processor; ties to lower task/job/vertex.
  int pick_ready_agent(int p) const {
    auto it = rqg_.find(p);
    if (it == rqg_.end() || it->second.empty()) return -1;
    int best = -1;
    for (int a : it->second) {
      if (best < 0) {
        best = a;
        continue;
      }
      const AgentRt& x = agents_[static_cast<std::size_t>(a)];
      const AgentRt& y = agents_[static_cast<std::size_t>(best)];
      auto key = [](const AgentRt& g) {
        return std::tuple<int, int, int, int>(-g.priority, g.task_id, g.job, g.vertex);
      };
      if (key(x) < key(y)) best = a;
    }
    return best;
  }

  void remove_from(std::vector<int>& v, int value) {
    v.erase(std::remove(v.begin(), v.end(), value), v.end());
  }

  int processor_ceiling(int p) const {
    int ceiling = INT_MIN;
    auto it = hosted_.find(p);
    if (it == hosted_.end()) return ceiling;
    for (int q : it->second)
      if (resources_.at(q).locked)
        ceiling = std::max(ceiling, ts_.ceiling_base(q));
    return ceiling;
  }

  // Rule handling when a vertex's current chunk finished and a request is due.
  void issue_request(time_ns t, VKey vk, bool& progress) {
    JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
    const std::size_t v = static_cast<std::size_t>(vk.vertex);
    const Piece& piece = j.plan[v][j.piece[v]];
    ResRt& res = resources_.at(piece.resource);
    emit(t, EventKind::lock_request, j.task_id, j.job_index, vk.vertex,
         piece.resource, res.global ? res.host : -1);
    if (!res.global) {
      if (res.locked) {
        j.state[v] = VState::suspended;
        res.waiters.push_back(vk);
        emit(t, EventKind::suspend, j.task_id, j.job_index, vk.vertex,
             piece.resource);
      } else {
        res.locked = true;
        res.holder_vertex = vk;
        emit(t, EventKind::lock_grant, j.task_id, j.job_index, vk.vertex,
             piece.resource);
        j.in_cs[v] = 1;
        j.exec_left[v] = piece.cs;
        j.state[v] = VState::ready_l;
        queues_[j.task_id].rq_l.push_back(vk);
      }
    } else {
      j.state[v] = VState::suspended;
      emit(t, EventKind::suspend, j.task_id, j.job_index, vk.vertex,
           piece.resource);
      AgentRt agent;
      agent.task_id = j.task_id;
      agent.priority = priority_of(j.task_id);
      agent.job = vk.job;
      agent.vertex = vk.vertex;
      agent.resource = piece.resource;
      agent.host = res.host;
      agent.cs_left = piece.cs;
      agent.state = AgentState::waiting;
      int idx = static_cast<int>(agents_.size());
      agents_.push_back(agent);
      sqg_[res.host].push_back(idx);  // grants are evaluated next phase
    }
    progress = true;
  }

  // Advance past a completed request (Rule 4): the vertex re-queues at the
  // tail of the non-critical ready queue with its next piece.
  void requeue_after_request(time_ns t, VKey vk) {
    JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
    const std::size_t v = static_cast<std::size_t>(vk.vertex);
    ++j.piece[v];
    j.exec_left[v] = j.plan[v][j.piece[v]].exec;
    j.in_cs[v] = 0;
    j.state[v] = VState::ready_n;
    queues_[j.task_id].rq_n.push_back(vk);
    emit(t, EventKind::resume, j.task_id, j.job_index, vk.vertex,
         j.plan[v][j.piece[v] - 1].resource);
  }

  void finish_vertex(time_ns t, VKey vk, bool& progress) {
    JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
    const std::size_t v = static_cast<std::size_t>(vk.vertex);
    j.state[v] = VState::done;
    --j.vertices_left;
    const Task& task = task_of(j);
    auto succ = task.successor_lists();
    for (int s : succ[v]) {
      if (--j.preds_left[static_cast<std::size_t>(s)] == 0) {
        j.state[static_cast<std::size_t>(s)] = VState::ready_n;
        queues_[j.task_id].rq_n.push_back({vk.job, s});
      }
    }
    if (j.vertices_left == 0) {
      j.finish = t;
      emit(t, EventKind::job_finish, j.task_id, j.job_index);
    }
    progress = true;
  }

  void release_local(time_ns t, int resource, bool& progress) {
    ResRt& res = resources_.at(resource);
    res.locked = false;
    res.holder_vertex = {};
    if (!res.waiters.empty()) {
      VKey w = res.waiters.front();
      res.waiters.pop_front();
      JobRt& j = jobs_[static_cast<std::size_t>(w.job)];
      const std::size_t v = static_cast<std::size_t>(w.vertex);
      res.locked = true;
      res.holder_vertex = w;
      emit(t, EventKind::lock_grant, j.task_id, j.job_index, w.vertex, resource);
      j.in_cs[v] = 1;
      j.exec_left[v] = j.plan[v][j.piece[v]].cs;
      j.state[v] = VState::ready_l;
      queues_[j.task_id].rq_l.push_back(w);
      emit(t, EventKind::resume, j.task_id, j.job_index, w.vertex, resource);
    }
    progress = true;
  }

  bool do_completions(time_ns t) {
    // Collect processors whose running entity finishes now; agents first,
    // then vertices by task priority, for a fixed simultaneous order.
    std::vector<int> due;
    for (int p = 0; p < ts_.m; ++p) {
      const ProcRt& pr = procs_[static_cast<std::size_t>(p)];
      if (pr.run != RunKind::idle && pr.busy_until == t) due.push_back(p);
    }
    if (due.empty()) return false;
    std::sort(due.begin(), due.end(), [&](int a, int b) {
      const ProcRt& x = procs_[static_cast<std::size_t>(a)];
      const ProcRt& y = procs_[static_cast<std::size_t>(b)];
      int tier_x = x.run == RunKind::agent ? 1 : 0;
      int tier_y = y.run == RunKind::agent ? 1 : 0;
      if (tier_x != tier_y) return tier_x > tier_y;
      int px = x.run == RunKind::agent
                   ? agents_[static_cast<std::size_t>(x.agent)].priority
                   : priority_of(jobs_[static_cast<std::size_t>(x.v.job)].task_id);
      int py = y.run == RunKind::agent
                   ? agents_[static_cast<std::size_t>(y.agent)].priority
                   : priority_of(jobs_[static_cast<std::size_t>(y.v.job)].task_id);
      if (px != py) return px > py;
      return a < b;
    });

    bool progress = false;
    for (int p : due) {
      ProcRt& pr = procs_[static_cast<std::size_t>(p)];
      if (pr.run == RunKind::idle || pr.busy_until != t) continue;  // changed meanwhile
      if (pr.run == RunKind::agent) {
        AgentRt& ag = agents_[static_cast<std::size_t>(pr.agent)];
        ag.state = AgentState::finished;
        ag.cs_left = 0;
        JobRt& j = jobs_[static_cast<std::size_t>(ag.job)];
        emit(t, EventKind::agent_end, ag.task_id, j.job_index, ag.vertex,
             ag.resource, p);
        ResRt& res = resources_.at(ag.resource);
        res.locked = false;
        res.holder_agent = -1;
        emit(t, EventKind::lock_release, ag.task_id, j.job_index, ag.vertex,
             ag.resource, p);
        pr.run = RunKind::idle;
        pr.agent = -1;
        requeue_after_request(t, {ag.job, ag.vertex});
        progress = true;
      } else {
        VKey vk = pr.v;
        JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
        const std::size_t v = static_cast<std::size_t>(vk.vertex);
        pr.run = RunKind::idle;
        if (j.in_cs[v]) {
          // Local critical section completed.
          const Piece& piece = j.plan[v][j.piece[v]];
          emit(t, EventKind::lock_release, j.task_id, j.job_index, vk.vertex,
               piece.resource, p);
          release_local(t, piece.resource, progress);
          requeue_after_request(t, vk);
        } else {
          const Piece& piece = j.plan[v][j.piece[v]];
          if (piece.resource >= 0) {
            issue_request(t, vk, progress);
          } else {
            finish_vertex(t, vk, progress);
          }
        }
        progress = true;
      }
    }
    return progress;
  }

  bool do_grants(time_ns t) {
    bool progress = false;
    for (int p = 0; p < ts_.m; ++p) {
      auto it = sqg_.find(p);
      if (it == sqg_.end()) continue;
      bool granted = true;
      while (granted) {
        granted = false;
        int best = -1;
        for (int a : it->second) {
          const AgentRt& ag = agents_[static_cast<std::size_t>(a)];
          if (resources_.at(ag.resource).locked) continue;
          if (ag.priority <= processor_ceiling(p)) continue;
          if (best < 0) {
            best = a;
            continue;
          }
          const AgentRt& cur = agents_[static_cast<std::size_t>(best)];
          auto key = [](const AgentRt& g) {
            return std::tuple<int, int, int, int>(-g.priority, g.task_id, g.job,
                                                  g.vertex);
          };
          if (key(ag) < key(cur)) best = a;
        }
        if (best >= 0) {
          AgentRt& ag = agents_[static_cast<std::size_t>(best)];
          ResRt& res = resources_.at(ag.resource);
          res.locked = true;
          res.holder_agent = best;
          ag.state = AgentState::ready;
          remove_from(it->second, best);
          rqg_[p].push_back(best);
          emit(t, EventKind::lock_grant, ag.task_id,
               jobs_[static_cast<std::size_t>(ag.job)].job_index, ag.vertex,
               ag.resource, p);
          granted = true;
          progress = true;
        }
      }
    }
    return progress;
  }

  void start_agent(time_ns t, int p, int agent) {
    ProcRt& pr = procs_[static_cast<std::size_t>(p)];
    AgentRt& ag = agents_[static_cast<std::size_t>(agent)];
    remove_from(rqg_[p], agent);
    ag.state = AgentState::running;
    pr.run = RunKind::agent;
    pr.agent = agent;
    pr.busy_until = t + ag.cs_left;
    heap_.push({pr.busy_until, 1, p, 0});
    emit(t, EventKind::agent_start, ag.task_id,
         jobs_[static_cast<std::size_t>(ag.job)].job_index, ag.vertex,
         ag.resource, p);
  }

  void preempt_vertex(time_ns t, int p) {
    ProcRt& pr = procs_[static_cast<std::size_t>(p)];
    VKey vk = pr.v;
    JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
    const std::size_t v = static_cast<std::size_t>(vk.vertex);
    j.exec_left[v] = pr.busy_until - t;
    emit(t, EventKind::preempt, j.task_id, j.job_index, vk.vertex, -1, p);
    if (j.in_cs[v]) {
      j.state[v] = VState::ready_l;
      queues_[j.task_id].rq_l.push_front(vk);  // still holds the lock
    } else {
      j.state[v] = VState::ready_n;
      queues_[j.task_id].rq_n.push_front(vk);
    }
    pr.run = RunKind::idle;
  }

  void preempt_agent(time_ns t, int p) {
    ProcRt& pr = procs_[static_cast<std::size_t>(p)];
    AgentRt& ag = agents_[static_cast<std::size_t>(pr.agent)];
    ag.cs_left = pr.busy_until - t;
    ag.state = AgentState::ready;
    emit(t, EventKind::preempt, ag.task_id,
         jobs_[static_cast<std::size_t>(ag.job)].job_index, ag.vertex,
         ag.resource, p);
    rqg_[p].push_back(pr.agent);
    pr.run = RunKind::idle;
    pr.agent = -1;
  }

  void start_vertex(time_ns t, int p, VKey vk) {
    ProcRt& pr = procs_[static_cast<std::size_t>(p)];
    JobRt& j = jobs_[static_cast<std::size_t>(vk.job)];
    const std::size_t v = static_cast<std::size_t>(vk.vertex);
    j.state[v] = VState::running;
    pr.run = RunKind::vertex;
    pr.v = vk;
    pr.busy_until = t + j.exec_left[v];
    heap_.push({pr.busy_until, 1, p, 0});
    emit(t, EventKind::dispatch, j.task_id, j.job_index, vk.vertex,
         j.in_cs[v] ? j.plan[v][j.piece[v]].resource : -1, p);
  }

  bool do_dispatch(time_ns t) {
    bool progress = false;
    for (int p = 0; p < ts_.m; ++p) {
      ProcRt& pr = procs_[static_cast<std::size_t>(p)];

      // Agents run at the elevated tier: they preempt vertices and each
      // other by task priority; a preempted holder keeps its lock.
      int best_agent = pick_ready_agent(p);
      if (best_agent >= 0) {
        if (pr.run == RunKind::agent) {
          if (agents_[static_cast<std::size_t>(best_agent)].priority >
              agents_[static_cast<std::size_t>(pr.agent)].priority) {
            preempt_agent(t, p);
            start_agent(t, p, best_agent);
            progress = true;
          }
        } else {
          if (pr.run == RunKind::vertex) preempt_vertex(t, p);
          start_agent(t, p, best_agent);
          progress = true;
        }
        continue;
      }
      if (pr.run != RunKind::idle) continue;
      if (pr.owner_task < 0) continue;
      TaskQueues& q = queues_[pr.owner_task];
      if (!q.rq_l.empty()) {
        VKey vk = q.rq_l.front();
        q.rq_l.pop_front();
        start_vertex(t, p, vk);
        progress = true;
      } else if (!q.rq_n.empty()) {
        VKey vk = q.rq_n.front();
        q.rq_n.pop_front();
        start_vertex(t, p, vk);
        progress = true;
      }
    }
    return progress;
  }

  void assert_work_conserving(time_ns t) {
    for (const auto& c : asg_.clusters) {
      const TaskQueues& q = queues_.at(c.task);
      if (q.rq_n.empty() && q.rq_l.empty()) continue;
      for (int p : c.processors)
        if (procs_[static_cast<std::size_t>(p)].run == RunKind::idle)
          throw std::logic_error("work conservation violated at t=" +
                                 std::to_string(t));
    }
    for (const auto& [p, agents] : rqg_)
      if (!agents.empty() &&
          procs_[static_cast<std::size_t>(p)].run == RunKind::idle)
        throw std::logic_error("idle processor with ready agents at t=" +
                               std::to_string(t));
  }
};

}  // namespace

SimTrace simulate(const TaskSet& ts, const Assignment& asg, const SimConfig& cfg) {
  Engine engine(ts, asg, cfg);
  return engine.run();
}

std::vector<TraceViolation> check_priority_ceiling(const SimTrace& trace,
                                                   const TaskSet& ts,
                                                   const Assignment& asg) {
  std::vector<TraceViolation> out;
  std::map<int, bool> locked;  // global resource -> locked
  for (const auto& e : trace.events) {
    if (e.resource < 0) continue;
    int host = asg.host_of(e.resource);
    if (host < 0) continue;  // local resources are not ceiling-gated
    if (e.kind == EventKind::lock_grant) {
      int ceiling = INT_MIN;
      for (const auto& [q, is_locked] : locked)
        if (is_locked && asg.host_of(q) == host)
          ceiling = std::max(ceiling, ts.ceiling_base(q));
      const Task* t = ts.task_by_id(e.task);
      if (t && t->priority <= ceiling)
        out.push_back({"lock granted under processor ceiling", e.time, e.task,
                       e.resource});
      locked[e.resource] = true;
    } else if (e.kind == EventKind::lock_release) {
      locked[e.resource] = false;
    }
  }
  return out;
}

std::vector<TraceViolation> check_single_lower_priority_blocking(
    const SimTrace& trace, const TaskSet& ts, const Assignment& asg) {
  std::vector<TraceViolation> out;

  struct Interval {
    time_ns start, end;
    int task, job, vertex, resource;
  };
  std::map<int, std::vector<Interval>> by_proc;
  std::map<std::tuple<int, int, int, int>, time_ns> open;  // agent key -> start
  for (const auto& e : trace.events) {
    if (e.resource < 0 || asg.host_of(e.resource) < 0) continue;
    auto key = std::make_tuple(e.task, e.job, e.vertex, e.resource);
    if (e.kind == EventKind::agent_start) {
      open[key] = e.time;
    } else if (e.kind == EventKind::agent_end || e.kind == EventKind::preempt) {
      auto it = open.find(key);
      if (it != open.end()) {
        by_proc[e.processor].push_back(
            {it->second, e.time, e.task, e.job, e.vertex, e.resource});
        open.erase(it);
      }
    }
  }

  // Pair each global lock request with its grant, then count the distinct
  // lower-priority agent executions overlapping the wait window.
  std::map<std::tuple<int, int, int, int>, time_ns> pending;
  for (const auto& e : trace.events) {
    if (e.resource < 0 || asg.host_of(e.resource) < 0) continue;
    auto key = std::make_tuple(e.task, e.job, e.vertex, e.resource);
    if (e.kind == EventKind::lock_request) {
      pending[key] = e.time;
    } else if (e.kind == EventKind::lock_grant) {
      auto it = pending.find(key);
      if (it == pending.end()) continue;  // local grant without agent pairing
      time_ns t_req = it->second;
      time_ns t_grant = e.time;
      pending.erase(it);
      const Task* requester = ts.task_by_id(e.task);
      if (!requester) continue;
      int host = asg.host_of(e.resource);
      std::set<std::tuple<int, int, int, int>> blockers;
      for (const auto& iv : by_proc[host]) {
        if (iv.start >= t_grant || iv.end <= t_req) continue;
        const Task* other = ts.task_by_id(iv.task);
        if (!other || other->priority >= requester->priority) continue;
        blockers.insert(std::make_tuple(iv.task, iv.job, iv.vertex, iv.resource));
      }
      if (blockers.size() > 1)
        out.push_back({"request blocked by " + std::to_string(blockers.size()) +
                           " lower-priority executions",
                       t_req, e.task, e.resource});
    }
  }
  return out;
}

std::vector<TraceViolation> check_response_bounds(const SimTrace& trace,
                                                  const WcrtReport& report,
                                                  const TaskSet& ts) {
  std::vector<TraceViolation> out;
  (void)ts;
  for (const auto& j : trace.jobs) {
    const TaskAnalysis* entry = report.entry(j.task);
    if (!entry || j.finish < 0) continue;
    time_ns response = j.finish - j.release;
    if (response > entry->wcrt)
      out.push_back({"observed response " + std::to_string(response) +
                         " exceeds bound " + std::to_string(entry->wcrt),
                     j.release, j.task, -1});
  }
  return out;
}

Assignment simulation_assignment(const TaskSet& ts, std::size_t path_cap) {
  auto outcome = partition_and_analyze(ts, PartitionMode::dpcp_ep, path_cap);
  if (outcome.schedulable) return outcome.assignment;

  // Capacity-blind fallback: initial clusters (shrunk to fit when needed)
  // plus a utilization-balancing placement. Good enough to exercise the
  // protocol; schedulability is not implied.
  std::vector<std::pair<int, int>> want;  // (task, cores)
  int total = 0;
  for (const auto& t : ts.tasks) {
    auto need = initial_core_count(t);
    int n = need ? *need : 1;
    want.emplace_back(t.id, n);
    total += n;
  }
  while (total > ts.m) {
    // Trim the widest cluster first.
    auto widest = std::max_element(
        want.begin(), want.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    if (widest->second <= 1)
      throw std::invalid_argument("more tasks than processors");
    --widest->second;
    --total;
  }
  Assignment asg;
  int next = 0;
  for (const auto& [task, cores] : want) {
    Cluster c;
    c.task = task;
    for (int i = 0; i < cores; ++i) c.processors.push_back(next++);
    asg.clusters.push_back(std::move(c));
  }
  std::vector<double> proc_util(static_cast<std::size_t>(ts.m), 0.0);
  std::vector<int> globals;
  for (int q : ts.resource_ids)
    if (ts.is_global(q)) globals.push_back(q);
  std::sort(globals.begin(), globals.end(), [&](int a, int b) {
    double ua = resource_utilization(ts, a), ub = resource_utilization(ts, b);
    if (ua != ub) return ua > ub;
    return a < b;
  });
  for (int q : globals) {
    int target = 0;
    for (int p = 1; p < ts.m; ++p)
      if (proc_util[static_cast<std::size_t>(p)] <
          proc_util[static_cast<std::size_t>(target)])
        target = p;
    asg.placement[q] = target;
    proc_util[static_cast<std::size_t>(target)] += resource_utilization(ts, q);
  }
  return asg;
}

std::string trace_to_ndjson(const SimTrace& trace) {
  std::ostringstream ss;
  for (const auto& e : trace.events) {
    ss << "{\"t\":" << e.time << ",\"kind\":\"" << event_kind_name(e.kind)
       << "\",\"task\":" << e.task << ",\"job\":" << e.job
       << ",\"vertex\":" << e.vertex << ",\"resource\":" << e.resource
       << ",\"proc\":" << e.processor << "}\n";
  }
  return ss.str();
}

std::string trace_to_csv(const SimTrace& trace) {
  std::ostringstream ss;
  ss << "time,kind,task,processor\n";
  for (const auto& e : trace.events)
    ss << e.time << "," << event_kind_name(e.kind) << "," << e.task << ","
       << e.processor << "\n";
  return ss.str();
}

}  // namespace fedlock
