#include "rnav/env/oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

namespace rnav::env {
namespace {

constexpr double kTieTolerance = 1e-9;

void require_viewpoint(const NavGraph& graph, ViewpointId v) {
  if (!graph.contains(v)) throw GraphError("unknown viewpoint " + std::to_string(v));
}

// Smallest-id neighbor that lies on a shortest path toward the target whose
// distances are `dist`. Choosing the smallest id at every hop yields the
// lexicographically smallest sequence among all shortest paths.
ViewpointId first_hop(const NavGraph& graph, const std::vector<double>& dist, ViewpointId v) {
  const double here = dist[static_cast<std::size_t>(v)];
  for (const auto& d : graph.directions(v)) {
    if (std::abs(d.length + dist[static_cast<std::size_t>(d.target)] - here) <= kTieTolerance * (1.0 + here)) {
      return d.target;
    }
  }
  throw GraphError("no shortest-path successor from viewpoint " + std::to_string(v));
}

}  // namespace

std::vector<double> distances_from(const NavGraph& graph, ViewpointId source) {
  require_viewpoint(graph, source);
  std::vector<double> dist(graph.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, ViewpointId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(v)]) continue;
    for (const auto& e : graph.directions(v)) {
      const double nd = d + e.length;
      if (nd < dist[static_cast<std::size_t>(e.target)]) {
        dist[static_cast<std::size_t>(e.target)] = nd;
        queue.emplace(nd, e.target);
      }
    }
  }
  return dist;
}

ShortestPath shortest_path(const NavGraph& graph, ViewpointId from, ViewpointId to) {
  require_viewpoint(graph, from);
  require_viewpoint(graph, to);
  const std::vector<double> dist = distances_from(graph, to);
  if (!std::isfinite(dist[static_cast<std::size_t>(from)])) {
    throw GraphError("viewpoints " + std::to_string(from) + " and " + std::to_string(to) + " are disconnected");
  }
  ShortestPath result{{from}, dist[static_cast<std::size_t>(from)]};
  ViewpointId v = from;
  while (v != to) {
    v = first_hop(graph, dist, v);
    result.path.push_back(v);
  }
  return result;
}

GoalOracle::GoalOracle(const NavGraph& graph, ViewpointId goal)
    : graph_(&graph), goal_(goal), dist_(distances_from(graph, goal)) {}

ViewpointId GoalOracle::next_hop(ViewpointId v) const {
  require_viewpoint(*graph_, v);
  if (v == goal_) return v;
  if (!std::isfinite(distance(v))) throw GraphError("viewpoint " + std::to_string(v) + " cannot reach the goal");
  return first_hop(*graph_, dist_, v);
}

std::size_t GoalOracle::hops(ViewpointId v) const {
  std::size_t n = 0;
  while (v != goal_) {
    v = next_hop(v);
    ++n;
  }
  return n;
}

}  // namespace rnav::env
