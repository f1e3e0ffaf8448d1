#include "rnav/eval/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "rnav/env/oracle.hpp"

namespace rnav::eval {

double navigation_error(const env::NavGraph& graph, const TrajectoryResult& r) {
  return env::shortest_path(graph, r.final_viewpoint(), r.goal).distance;
}

double oracle_navigation_error(const env::NavGraph& graph, const TrajectoryResult& r) {
  const std::vector<double> dist = env::distances_from(graph, r.goal);
  double best = dist.at(static_cast<std::size_t>(r.visited.front()));
  for (const ViewpointId v : r.visited) best = std::min(best, dist.at(static_cast<std::size_t>(v)));
  return best;
}

bool success(double navigation_error, double threshold) { return navigation_error < threshold; }

EpisodeScore score_episode(const env::NavGraph& graph, const TrajectoryResult& r, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("success threshold must be positive");
  if (r.visited.empty() || r.visited.front() != r.start) {
    throw std::invalid_argument("trajectory must start at the episode start");
  }
  EpisodeScore s;
  const std::vector<double> dist = env::distances_from(graph, r.goal);
  s.ne = dist.at(static_cast<std::size_t>(r.final_viewpoint()));
  s.one = s.ne;
  for (const ViewpointId v : r.visited) s.one = std::min(s.one, dist.at(static_cast<std::size_t>(v)));
  s.shortest = dist.at(static_cast<std::size_t>(r.start));
  s.success = success(s.ne, threshold);
  s.oracle_success = success(s.one, threshold);
  if (s.success && s.shortest > 0.0) s.spl = s.shortest / std::max(r.length, s.shortest);
  return s;
}

double spl(const std::vector<EpisodeScore>& scores, const std::vector<TrajectoryResult>& results) {
  if (scores.size() != results.size()) throw std::invalid_argument("spl: scores and results differ in size");
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i].shortest > 0.0)) throw std::invalid_argument("spl: shortest distance must be positive");
    if (scores[i].success) total += scores[i].shortest / std::max(results[i].length, scores[i].shortest);
  }
  return total / static_cast<double>(scores.size());
}

RollbackStats rollback_stats(const std::vector<EpisodeScore>& scores, const std::vector<TrajectoryResult>& results) {
  if (scores.size() != results.size()) throw std::invalid_argument("rollback_stats: size mismatch");
  RollbackStats s;
  std::size_t failures = 0, failed_with_rollback = 0, steps = 0, rollbacks = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    steps += static_cast<std::size_t>(results[i].steps);
    rollbacks += static_cast<std::size_t>(results[i].rollbacks);
    if (scores[i].success) continue;
    ++failures;
    if (results[i].has_rollback()) ++failed_with_rollback;
  }
  if (failures > 0) s.failures_with_rollback = static_cast<double>(failed_with_rollback) / static_cast<double>(failures);
  if (steps > 0) s.rollbacks_per_step = static_cast<double>(rollbacks) / static_cast<double>(steps);
  return s;
}

Evaluation evaluate(const env::Dataset& data, const std::vector<TrajectoryResult>& results, double threshold) {
  Evaluation e;
  e.scores.reserve(results.size());
  for (const auto& r : results) e.scores.push_back(score_episode(data.graphs.at(static_cast<std::size_t>(r.graph)), r, threshold));
  MetricSummary& m = e.summary;
  m.episodes = results.size();
  if (results.empty()) return e;
  for (const auto& s : e.scores) {
    m.ne += s.ne;
    m.one += s.one;
    m.sr += s.success ? 1.0 : 0.0;
    m.osr += s.oracle_success ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(results.size());
  m.ne /= n;
  m.one /= n;
  m.sr /= n;
  m.osr /= n;
  m.spl = spl(e.scores, results);
  m.rollback = rollback_stats(e.scores, results);
  return e;
}

nlohmann::json to_json(const MetricSummary& s) {
  return {{"episodes", s.episodes},
          {"ne", s.ne},
          {"sr", s.sr},
          {"osr", s.osr},
          {"spl", s.spl},
          {"one", s.one},
          {"failures_with_rollback", s.rollback.failures_with_rollback},
          {"rollbacks_per_step", s.rollback.rollbacks_per_step}};
}

nlohmann::json to_json(const TrajectoryResult& r, const EpisodeScore& s) {
  return {{"episode", r.episode}, {"graph", r.graph},     {"start", r.start},        {"goal", r.goal},
          {"visited", r.visited}, {"length", r.length},   {"steps", r.steps},        {"rollbacks", r.rollbacks},
          {"ne", s.ne},           {"one", s.one},         {"success", s.success},    {"oracle_success", s.oracle_success},
          {"spl", s.spl},         {"progress", r.progress}};
}

}  // namespace rnav::eval
