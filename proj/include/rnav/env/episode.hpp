#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rnav/env/nav_graph.hpp"
#include "rnav/env/vocabulary.hpp"

namespace rnav::env {

enum class Split { kTrain, kSeenEval, kUnseenEval };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct Episode {
  int id = 0;
  int graph = 0;  // index into the dataset's graph list
  Split split = Split::kTrain;
  std::vector<int> instruction;
  ViewpointId start = 0;
  ViewpointId goal = 0;
  std::vector<ViewpointId> path;  // ground-truth shortest path, start..goal
  double noise = 0.0;
};

struct EpisodeParams {
  int min_edges = 3;
  int max_edges = 7;
};

// Relative turn between two headings (radians), binned at 45 degrees.
RelativeDirection relative_direction(double heading_before, double heading_after);

// Template: "go to <L1> [turn <dir> go to <Lk>]... stop at <Ln>", one movement
// clause per edge plus one stop clause; 7 edges fit in 36 tokens. noise > 0 substitutes
// landmark synonyms, drops tokens, and inserts fillers, each with probability
// scaled by `noise`; noise == 0 is the clean template and consumes no randomness.
std::vector<int> make_instruction(const NavGraph& graph, const std::vector<ViewpointId>& path, double noise,
                                  std::uint64_t seed);

// Samples a start and a goal whose shortest path has min_edges..max_edges edges.
// Throws GraphError if the graph has no such pair.
Episode make_episode(const NavGraph& graph, int graph_index, std::uint64_t seed, double noise,
                     const EpisodeParams& params = {});

std::string instruction_text(const std::vector<int>& tokens);

}  // namespace rnav::env
