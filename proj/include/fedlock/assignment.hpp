#pragma once

#include <map>
#include <vector>

namespace fedlock {

/// Dedicated processors of one task. Capacity equals the processor count;
/// utilization is the owner's plus all resources placed on its processors.
struct Cluster {
  int task = -1;
  std::vector<int> processors;
};

/// Processor allocation for a task set: disjoint clusters covering at most m
/// processors, plus the host processor of every global resource.
struct Assignment {
  std::vector<Cluster> clusters;
  std::map<int, int> placement;  // global resource id -> processor id

  const Cluster* cluster_of(int task) const {
    for (const auto& c : clusters)
      if (c.task == task) return &c;
    return nullptr;
  }

  int host_of(int resource) const {
    auto it = placement.find(resource);
    return it == placement.end() ? -1 : it->second;
  }
};

}  // namespace fedlock
