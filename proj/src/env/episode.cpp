#include "rnav/env/episode.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "rnav/core/rng.hpp"
#include "rnav/env/oracle.hpp"

namespace rnav::env {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kSeenEval: return "seen";
    case Split::kUnseenEval: return "unseen";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "seen") return Split::kSeenEval;
  if (name == "unseen") return Split::kUnseenEval;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

RelativeDirection relative_direction(double heading_before, double heading_after) {
  const double turn = std::remainder(heading_after - heading_before, 2.0 * M_PI) * 180.0 / M_PI;
  const double a = std::abs(turn);
  if (a < 22.5) return RelativeDirection::kStraight;
  if (a > 157.5) return RelativeDirection::kAround;
  const bool right = turn > 0.0;  // headings grow clockwise
  if (a < 67.5) return right ? RelativeDirection::kSlightRight : RelativeDirection::kSlightLeft;
  if (a < 112.5) return right ? RelativeDirection::kRight : RelativeDirection::kLeft;
  return right ? RelativeDirection::kSharpRight : RelativeDirection::kSharpLeft;
}

namespace {

std::vector<int> template_tokens(const NavGraph& graph, const std::vector<ViewpointId>& path) {
  if (path.size() < 2) throw std::invalid_argument("make_instruction: path needs at least one edge");
  std::vector<int> tokens;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int landmark = Vocabulary::landmark_token(graph.landmark(path[i + 1]));
    if (i == 0) {
      tokens.insert(tokens.end(), {Vocabulary::kGo, Vocabulary::kTo, landmark});
      continue;
    }
    const double before = heading_between(graph.position(path[i - 1]), graph.position(path[i]));
    const double after = heading_between(graph.position(path[i]), graph.position(path[i + 1]));
    const int dir = Vocabulary::direction_token(relative_direction(before, after));
    tokens.insert(tokens.end(), {Vocabulary::kTurn, dir, Vocabulary::kGo, Vocabulary::kTo, landmark});
  }
  tokens.insert(tokens.end(),
                {Vocabulary::kStop, Vocabulary::kAt, Vocabulary::landmark_token(graph.landmark(path.back()))});
  return tokens;
}

}  // namespace

std::vector<int> make_instruction(const NavGraph& graph, const std::vector<ViewpointId>& path, double noise,
                                  std::uint64_t seed) {
  std::vector<int> clean = template_tokens(graph, path);
  if (noise <= 0.0) return clean;

  Rng rng = make_rng(seed, "instruction-noise");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> filler(0, Vocabulary::kFillerCount - 1);
  std::vector<int> noisy;
  for (const int token : clean) {
    if (Vocabulary::is_landmark(token)) {
      noisy.push_back(unit(rng) < noise ? Vocabulary::synonym_token(token - Vocabulary::kFirstLandmark) : token);
    } else if (unit(rng) >= 0.5 * noise) {
      noisy.push_back(token);
    }
    if (unit(rng) < 0.2 * noise) noisy.push_back(Vocabulary::kFirstFiller + filler(rng));
  }
  if (noisy.empty()) noisy.push_back(clean.back());
  return noisy;
}

Episode make_episode(const NavGraph& graph, int graph_index, std::uint64_t seed, double noise,
                     const EpisodeParams& params) {
  Rng rng = make_rng(seed, "episode");
  std::uniform_int_distribution<int> pick(0, static_cast<int>(graph.size()) - 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const ViewpointId start = pick(rng);
    std::vector<ViewpointId> goals;
    std::vector<std::vector<ViewpointId>> paths;
    for (ViewpointId g = 0; g < static_cast<ViewpointId>(graph.size()); ++g) {
      if (g == start) continue;
      ShortestPath sp = shortest_path(graph, start, g);
      const int edges = static_cast<int>(sp.path.size()) - 1;
      if (edges >= params.min_edges && edges <= params.max_edges) {
        goals.push_back(g);
        paths.push_back(std::move(sp.path));
      }
    }
    if (goals.empty()) continue;
    std::uniform_int_distribution<std::size_t> which(0, goals.size() - 1);
    const std::size_t k = which(rng);
    Episode ep;
    ep.graph = graph_index;
    ep.start = start;
    ep.goal = goals[k];
    ep.path = std::move(paths[k]);
    ep.noise = noise;
    ep.instruction = make_instruction(graph, ep.path, noise, derive_seed(seed, "instruction"));
    return ep;
  }
  throw GraphError("make_episode: no start/goal pair with the requested path length");
}

std::string instruction_text(const std::vector<int>& tokens) {
  std::string out;
  for (const int t : tokens) {
    if (!out.empty()) out += ' ';
    out += Vocabulary::word(t);
  }
  return out;
}

}  // namespace rnav::env
