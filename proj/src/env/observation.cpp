#include "rnav/env/observation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rnav/env/oracle.hpp"

namespace rnav::env {

int PanoramaObservation::slot_of(ViewpointId target) const {
  for (std::size_t k = 1; k < targets.size(); ++k) {
    if (targets[k] == target) return static_cast<int>(k);
  }
  return -1;
}

std::vector<double> orientation_block(double heading, double elevation, std::size_t tile) {
  const double unit[4] = {std::sin(heading), std::cos(heading), std::sin(elevation), std::cos(elevation)};
  std::vector<double> out;
  out.reserve(4 * tile);
  for (std::size_t t = 0; t < tile; ++t) out.insert(out.end(), unit, unit + 4);
  return out;
}

PanoramaObservation observe(const NavGraph& graph, ViewpointId v, const FeatureConfig& config) {
  if (!graph.contains(v)) throw GraphError("observe: unknown viewpoint " + std::to_string(v));
  const auto& dirs = graph.directions(v);
  PanoramaObservation obs;
  obs.viewpoint = v;
  obs.targets.reserve(dirs.size() + 1);
  obs.features.reserve(dirs.size() + 1);
  obs.targets.push_back(-1);
  obs.features.emplace_back(config.feature_dim(), 0.0);
  for (const auto& d : dirs) {
    if (d.appearance.size() != config.appearance_dim) {
      throw std::invalid_argument("observe: graph appearance dim " + std::to_string(d.appearance.size()) +
                                  " does not match feature config " + std::to_string(config.appearance_dim));
    }
    std::vector<double> f = d.appearance;
    const auto orient = orientation_block(d.heading, d.elevation, config.orient_tile);
    f.insert(f.end(), orient.begin(), orient.end());
    obs.targets.push_back(d.target);
    obs.features.push_back(std::move(f));
  }
  obs.valid.assign(obs.targets.size(), 1);
  return obs;
}

double progress_target(const NavGraph& graph, const Episode& episode, ViewpointId v) {
  const std::vector<double> dist = distances_from(graph, episode.goal);
  const double d0 = dist.at(static_cast<std::size_t>(episode.start));
  if (!(d0 > 0.0)) throw std::invalid_argument("progress_target: start coincides with goal");
  if (!graph.contains(v)) throw GraphError("progress_target: unknown viewpoint " + std::to_string(v));
  return (d0 - dist[static_cast<std::size_t>(v)]) / d0;
}

int ground_truth_action(const NavGraph& graph, const Episode& episode, ViewpointId v) {
  if (v == episode.goal) return 0;
  const GoalOracle oracle(graph, episode.goal);
  const auto index = graph.direction_index(v, oracle.next_hop(v));
  return 1 + static_cast<int>(*index);
}

}  // namespace rnav::env
