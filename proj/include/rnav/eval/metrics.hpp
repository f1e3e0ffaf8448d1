#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnav/env/dataset.hpp"

namespace rnav::eval {

using env::ViewpointId;

struct TrajectoryResult {
  int episode = 0;
  int graph = 0;
  ViewpointId start = 0;
  ViewpointId goal = 0;
  std::vector<ViewpointId> visited;  // starts at the episode start, one entry per move
  double length = 0.0;               // meters; the stop action adds nothing
  int steps = 0;                     // actions taken, including the final stop
  int rollbacks = 0;                 // moves back to the viewpoint occupied one step earlier
  std::vector<double> progress;      // progress estimate at each step

  ViewpointId final_viewpoint() const { return visited.back(); }
  bool has_rollback() const { return rollbacks > 0; }
};

double navigation_error(const env::NavGraph& graph, const TrajectoryResult& r);
// Minimum distance to the goal over the visited viewpoints.
double oracle_navigation_error(const env::NavGraph& graph, const TrajectoryResult& r);
bool success(double navigation_error, double threshold);

struct EpisodeScore {
  double ne = 0.0;
  double one = 0.0;
  double shortest = 0.0;  // start-to-goal distance
  bool success = false;
  bool oracle_success = false;
  double spl = 0.0;
};

EpisodeScore score_episode(const env::NavGraph& graph, const TrajectoryResult& r, double threshold);

// (1/N) sum S_i l_i / max(p_i, l_i)
double spl(const std::vector<EpisodeScore>& scores, const std::vector<TrajectoryResult>& results);

struct RollbackStats {
  double failures_with_rollback = 0.0;  // fraction of unsuccessful episodes with >= 1 rollback
  double rollbacks_per_step = 0.0;
};

RollbackStats rollback_stats(const std::vector<EpisodeScore>& scores, const std::vector<TrajectoryResult>& results);

struct MetricSummary {
  std::size_t episodes = 0;
  double ne = 0.0;
  double sr = 0.0;
  double osr = 0.0;
  double spl = 0.0;
  double one = 0.0;
  RollbackStats rollback;
};

struct Evaluation {
  std::vector<EpisodeScore> scores;
  MetricSummary summary;
};

Evaluation evaluate(const env::Dataset& data, const std::vector<TrajectoryResult>& results, double threshold);

nlohmann::json to_json(const MetricSummary& s);
nlohmann::json to_json(const TrajectoryResult& r, const EpisodeScore& s);

}  // namespace rnav::eval
