#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rnav/env/episode.hpp"
#include "rnav/env/nav_graph.hpp"

namespace rnav::env {

struct FeatureConfig {
  std::size_t appearance_dim = 64;
  std::size_t orient_tile = 8;

  std::size_t orient_dim() const { return 4 * orient_tile; }
  std::size_t feature_dim() const { return appearance_dim + orient_dim(); }

  static FeatureConfig desk() { return {64, 8}; }
  static FeatureConfig full() { return {2048, 32}; }
};

// Slot 0 is stop (all-zero feature, target -1); slot k + 1 is the k-th
// navigable direction of the viewpoint in target-id order.
struct PanoramaObservation {
  ViewpointId viewpoint = -1;
  std::vector<ViewpointId> targets;
  std::vector<std::vector<double>> features;
  std::vector<std::uint8_t> valid;

  std::size_t slots() const { return targets.size(); }
  // Slot whose direction leads to `target`, or -1.
  int slot_of(ViewpointId target) const;
};

std::vector<double> orientation_block(double heading, double elevation, std::size_t tile);

// Throws GraphError for an unknown viewpoint and std::invalid_argument when
// the graph's appearance dim differs from the config.
PanoramaObservation observe(const NavGraph& graph, ViewpointId v, const FeatureConfig& config = {});

// (d0 - dt) / d0 with d0 the start-to-goal and dt the v-to-goal shortest distance.
double progress_target(const NavGraph& graph, const Episode& episode, ViewpointId v);

// 0 (stop) at the goal, otherwise the slot of the first hop of a freshly
// computed shortest path from v to the goal.
int ground_truth_action(const NavGraph& graph, const Episode& episode, ViewpointId v);

}  // namespace rnav::env
