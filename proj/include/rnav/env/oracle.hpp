#pragma once

#include <cstddef>
#include <vector>

#include "rnav/env/nav_graph.hpp"

namespace rnav::env {

struct ShortestPath {
  std::vector<ViewpointId> path;
  double distance = 0.0;
};

// Dijkstra distances (meters) from `source` to every viewpoint; +inf when unreachable.
std::vector<double> distances_from(const NavGraph& graph, ViewpointId source);

// Minimal-length path; among equal-length paths the lexicographically smallest
// viewpoint-id sequence. Throws GraphError for unknown or disconnected viewpoints.
ShortestPath shortest_path(const NavGraph& graph, ViewpointId from, ViewpointId to);

// Distances to a fixed goal, for per-step supervision during rollouts.
class GoalOracle {
 public:
  GoalOracle(const NavGraph& graph, ViewpointId goal);

  ViewpointId goal() const { return goal_; }
  double distance(ViewpointId v) const { return dist_.at(static_cast<std::size_t>(v)); }
  // First hop of shortest_path(v, goal); v itself when v is the goal.
  ViewpointId next_hop(ViewpointId v) const;
  // Number of edges on shortest_path(v, goal).
  std::size_t hops(ViewpointId v) const;

 private:
  const NavGraph* graph_;
  ViewpointId goal_;
  std::vector<double> dist_;
};

}  // namespace rnav::env
