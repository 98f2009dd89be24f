#include "fedlock/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fedlock {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string taskset_to_json(const TaskSet& ts) {
  ordered root;
  root["m"] = ts.m;
  ordered resources = ordered::array();
  for (int q : ts.resource_ids) {
    ordered r;
    r["id"] = q;
    ordered lens = ordered::object();
    for (const auto& t : ts.tasks) {
      auto it = t.cs_lengths.find(q);
      if (it != t.cs_lengths.end()) lens[std::to_string(t.id)] = it->second;
    }
    r["cs_lengths"] = lens;
    resources.push_back(r);
  }
  root["resources"] = resources;

  ordered tasks = ordered::array();
  for (const auto& t : ts.tasks) {
    ordered jt;
    jt["id"] = t.id;
    jt["priority"] = t.priority;
    jt["period_ns"] = t.period;
    jt["deadline_ns"] = t.deadline;
    ordered verts = ordered::array();
    for (const auto& v : t.vertices) {
      ordered jv;
      jv["wcet_ns"] = v.wcet;
      ordered demands = ordered::object();
      for (const auto& [q, n] : v.demands)
        if (n > 0) demands[std::to_string(q)] = n;
      jv["demands"] = demands;
      verts.push_back(jv);
    }
    jt["vertices"] = verts;
    ordered edges = ordered::array();
    for (const auto& [p, s] : t.edges) edges.push_back(ordered::array({p, s}));
    jt["edges"] = edges;
    tasks.push_back(jt);
  }
  root["tasks"] = tasks;

  if (!ts.meta.empty()) {
    ordered meta = ordered::object();
    for (const auto& [k, v] : ts.meta) meta[k] = v;
    root["meta"] = meta;
  }
  return root.dump(2) + "\n";
}

TaskSet taskset_from_json(const std::string& text) {
  json root = json::parse(text);
  TaskSet ts;
  ts.m = root.at("m").get<int>();

  std::map<int, std::map<int, time_ns>> cs;  // resource -> task -> length
  for (const auto& r : root.at("resources")) {
    int q = r.at("id").get<int>();
    ts.resource_ids.push_back(q);
    if (r.contains("cs_lengths"))
      for (const auto& [task_key, len] : r.at("cs_lengths").items())
        cs[q][std::stoi(task_key)] = len.get<time_ns>();
  }
  std::sort(ts.resource_ids.begin(), ts.resource_ids.end());

  for (const auto& jt : root.at("tasks")) {
    Task t;
    t.id = jt.at("id").get<int>();
    t.priority = jt.at("priority").get<int>();
    t.period = jt.at("period_ns").get<time_ns>();
    t.deadline = jt.at("deadline_ns").get<time_ns>();
    for (const auto& jv : jt.at("vertices")) {
      Vertex v;
      v.wcet = jv.at("wcet_ns").get<time_ns>();
      if (jv.contains("demands"))
        for (const auto& [res_key, n] : jv.at("demands").items()) {
          int cnt = n.get<int>();
          if (cnt != 0) v.demands[std::stoi(res_key)] = cnt;
        }
      t.vertices.push_back(std::move(v));
    }
    if (jt.contains("edges"))
      for (const auto& e : jt.at("edges"))
        t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto& [q, per_task] : cs) {
      auto it = per_task.find(t.id);
      if (it != per_task.end()) t.cs_lengths[q] = it->second;
    }
    ts.tasks.push_back(std::move(t));
  }

  if (root.contains("meta"))
    for (const auto& [k, v] : root.at("meta").items())
      ts.meta[k] = v.get<std::string>();
  return ts;
}

std::string assignment_to_json(const Assignment& asg) {
  ordered root;
  ordered clusters = ordered::array();
  for (const auto& c : asg.clusters) {
    ordered jc;
    jc["task"] = c.task;
    jc["processors"] = c.processors;
    clusters.push_back(jc);
  }
  root["clusters"] = clusters;
  ordered placement = ordered::object();
  for (const auto& [q, p] : asg.placement) placement[std::to_string(q)] = p;
  root["placement"] = placement;
  return root.dump(2) + "\n";
}

Assignment assignment_from_json(const std::string& text) {
  json root = json::parse(text);
  Assignment asg;
  for (const auto& jc : root.at("clusters")) {
    Cluster c;
    c.task = jc.at("task").get<int>();
    c.processors = jc.at("processors").get<std::vector<int>>();
    asg.clusters.push_back(std::move(c));
  }
  if (root.contains("placement"))
    for (const auto& [res_key, p] : root.at("placement").items())
      asg.placement[std::stoi(res_key)] = p.get<int>();
  return asg;
}

std::string report_to_json(const WcrtReport& report) {
  ordered root;
  root["schedulable"] = report.schedulable;
  ordered tasks = ordered::array();
  for (const auto& e : report.tasks) {
    ordered jt;
    jt["task"] = e.task;
    jt["R_ns"] = e.wcrt;
    jt["verdict"] = e.schedulable;
    jt["mode"] = e.mode_used == AnalysisMode::enumerate_paths ? "EP" : "EN";
    ordered b;
    b["length"] = e.binding.length;
    b["B"] = e.binding.inter_blocking;
    b["b"] = e.binding.intra_blocking;
    b["I_intra"] = e.binding.intra_interference;
    b["I_agent"] = e.binding.agent_interference;
    if (!e.binding.path_vertices.empty()) b["path"] = e.binding.path_vertices;
    jt["breakdown"] = b;
    tasks.push_back(jt);
  }
  root["tasks"] = tasks;
  return root.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace fedlock
