#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnav/env/episode.hpp"
#include "rnav/env/generator.hpp"
#include "rnav/env/nav_graph.hpp"
#include "rnav/env/observation.hpp"

namespace rnav::env {

struct EnvConfig {
  std::uint64_t seed = 1;
  int train_graphs = 40;
  int unseen_graphs = 8;
  int train_episodes_per_graph = 20;
  int seen_episodes_per_graph = 5;
  int unseen_episodes_per_graph = 25;
  double noise = 0.3;
  GraphParams graph;
  EpisodeParams episode;
  FeatureConfig features;
};

// Graphs [0, train_graphs) serve the train and seen splits; the rest are
// held out for the unseen split. Every split also has a "<name>_noisy" twin
// with the same paths and noisy instructions.
struct Dataset {
  EnvConfig config;
  std::vector<NavGraph> graphs;
  std::map<std::string, std::vector<Episode>> splits;

  const std::vector<Episode>& split(const std::string& name) const;
  const NavGraph& graph_of(const Episode& e) const { return graphs.at(static_cast<std::size_t>(e.graph)); }
};

Dataset build_dataset(const EnvConfig& config);

nlohmann::json to_json(const EnvConfig& config);
EnvConfig env_config_from_json(const nlohmann::json& j);

// Writes config.json, graphs.json and one <split>.json per split into dir.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace rnav::env
