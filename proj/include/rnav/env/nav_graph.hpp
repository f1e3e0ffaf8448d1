#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rnav::env {

using ViewpointId = int;

struct Vec3 {
  double x = 0.0;  // east, meters
  double y = 0.0;  // north, meters
  double z = 0.0;  // up, meters
};

// One navigable direction from a viewpoint toward a neighbor.
struct Direction {
  ViewpointId target = -1;
  double length = 0.0;     // Euclidean edge length, meters
  double heading = 0.0;    // radians, 0 = north, clockwise positive
  double elevation = 0.0;  // radians, positive = upward
  std::vector<double> appearance;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Undirected navigation graph. Directions at each viewpoint are sorted by
// target id; the panoramic slot of a direction is 1 + its index (slot 0 = stop).
class NavGraph {
 public:
  NavGraph() = default;
  NavGraph(std::vector<Vec3> positions, std::vector<int> landmarks, std::vector<std::vector<Direction>> directions);

  std::size_t size() const { return positions_.size(); }
  bool contains(ViewpointId v) const { return v >= 0 && static_cast<std::size_t>(v) < positions_.size(); }

  const Vec3& position(ViewpointId v) const { return positions_.at(static_cast<std::size_t>(v)); }
  int landmark(ViewpointId v) const { return landmarks_.at(static_cast<std::size_t>(v)); }
  const std::vector<Direction>& directions(ViewpointId v) const { return directions_.at(static_cast<std::size_t>(v)); }

  std::optional<std::size_t> direction_index(ViewpointId from, ViewpointId to) const;
  std::optional<double> edge_length(ViewpointId from, ViewpointId to) const;

  std::size_t appearance_dim() const;
  std::size_t max_degree() const;
  double average_degree() const;
  std::size_t edge_count() const;
  bool connected() const;

  // Throws GraphError on asymmetric edges, non-positive lengths, or
  // heading/elevation inconsistent with positions.
  void validate() const;

  const std::vector<Vec3>& positions() const { return positions_; }
  const std::vector<int>& landmarks() const { return landmarks_; }

 private:
  std::vector<Vec3> positions_;
  std::vector<int> landmarks_;
  std::vector<std::vector<Direction>> directions_;
};

double heading_between(const Vec3& from, const Vec3& to);
double elevation_between(const Vec3& from, const Vec3& to);
double distance_between(const Vec3& a, const Vec3& b);

}  // namespace rnav::env
