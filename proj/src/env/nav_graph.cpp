#include "rnav/env/nav_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rnav::env {

double heading_between(const Vec3& from, const Vec3& to) { return std::atan2(to.x - from.x, to.y - from.y); }

double elevation_between(const Vec3& from, const Vec3& to) {
  const double horizontal = std::hypot(to.x - from.x, to.y - from.y);
  return std::atan2(to.z - from.z, horizontal);
}

double distance_between(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

NavGraph::NavGraph(std::vector<Vec3> positions, std::vector<int> landmarks, std::vector<std::vector<Direction>> directions)
    : positions_(std::move(positions)), landmarks_(std::move(landmarks)), directions_(std::move(directions)) {
  if (positions_.empty()) throw GraphError("navigation graph needs at least one viewpoint");
  if (landmarks_.size() != positions_.size() || directions_.size() != positions_.size()) {
    throw GraphError("navigation graph: per-viewpoint arrays differ in length");
  }
  for (auto& dirs : directions_) {
    std::sort(dirs.begin(), dirs.end(), [](const Direction& a, const Direction& b) { return a.target < b.target; });
  }
}

std::optional<std::size_t> NavGraph::direction_index(ViewpointId from, ViewpointId to) const {
  const auto& dirs = directions(from);
  const auto it = std::lower_bound(dirs.begin(), dirs.end(), to,
                                   [](const Direction& d, ViewpointId t) { return d.target < t; });
  if (it == dirs.end() || it->target != to) return std::nullopt;
  return static_cast<std::size_t>(it - dirs.begin());
}

std::optional<double> NavGraph::edge_length(ViewpointId from, ViewpointId to) const {
  if (auto i = direction_index(from, to)) return directions(from)[*i].length;
  return std::nullopt;
}

std::size_t NavGraph::appearance_dim() const {
  for (const auto& dirs : directions_) {
    if (!dirs.empty()) return dirs.front().appearance.size();
  }
  return 0;
}

std::size_t NavGraph::max_degree() const {
  std::size_t m = 0;
  for (const auto& dirs : directions_) m = std::max(m, dirs.size());
  return m;
}

double NavGraph::average_degree() const {
  std::size_t total = 0;
  for (const auto& dirs : directions_) total += dirs.size();
  return static_cast<double>(total) / static_cast<double>(size());
}

std::size_t NavGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& dirs : directions_) total += dirs.size();
  return total / 2;
}

bool NavGraph::connected() const {
  std::vector<char> seen(size(), 0);
  std::vector<ViewpointId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const ViewpointId v = stack.back();
    stack.pop_back();
    for (const auto& d : directions(v)) {
      if (!seen[static_cast<std::size_t>(d.target)]) {
        seen[static_cast<std::size_t>(d.target)] = 1;
        ++count;
        stack.push_back(d.target);
      }
    }
  }
  return count == size();
}

void NavGraph::validate() const {
  const std::size_t dim = appearance_dim();
  for (ViewpointId v = 0; v < static_cast<ViewpointId>(size()); ++v) {
    for (const auto& d : directions(v)) {
      const std::string where = "edge " + std::to_string(v) + "->" + std::to_string(d.target);
      if (!contains(d.target) || d.target == v) throw GraphError(where + " has an invalid target");
      if (!(d.length > 0.0)) throw GraphError(where + " has non-positive length");
      const auto back = edge_length(d.target, v);
      if (!back || std::abs(*back - d.length) > 1e-9) throw GraphError(where + " is not symmetric");
      const Vec3& a = position(v);
      const Vec3& b = position(d.target);
      if (std::abs(distance_between(a, b) - d.length) > 1e-9) throw GraphError(where + " length disagrees with positions");
      if (std::abs(std::remainder(heading_between(a, b) - d.heading, 2.0 * M_PI)) > 1e-9 ||
          std::abs(elevation_between(a, b) - d.elevation) > 1e-9) {
        throw GraphError(where + " orientation disagrees with positions");
      }
      if (d.appearance.size() != dim) throw GraphError(where + " has a mismatched appearance dimension");
    }
  }
  if (!connected()) throw GraphError("navigation graph is not connected");
}

}  // namespace rnav::env
