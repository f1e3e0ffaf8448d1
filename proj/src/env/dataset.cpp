#include "rnav/env/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "rnav/core/rng.hpp"

namespace rnav::env {

using nlohmann::json;

namespace {

const char* const kBaseSplits[] = {"train", "seen", "unseen"};

std::vector<Episode> episodes_for(const Dataset& data, const std::vector<int>& graph_ids, int per_graph,
                                  Split split, const char* tag) {
  std::vector<Episode> out;
  for (const int g : graph_ids) {
    for (int k = 0; k < per_graph; ++k) {
      Episode e = make_episode(data.graphs[static_cast<std::size_t>(g)], g,
                               derive_seed(data.config.seed, tag, static_cast<std::uint64_t>(g * 1000 + k)), 0.0,
                               data.config.episode);
      e.id = static_cast<int>(out.size());
      e.split = split;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<Episode> noisy_twin(const Dataset& data, const std::vector<Episode>& clean, const char* tag) {
  std::vector<Episode> out = clean;
  for (Episode& e : out) {
    e.noise = data.config.noise;
    e.instruction = make_instruction(data.graph_of(e), e.path, e.noise,
                                     derive_seed(data.config.seed, tag, static_cast<std::uint64_t>(e.id)));
  }
  return out;
}

json graph_to_json(const NavGraph& g) {
  json nodes = json::array();
  for (std::size_t v = 0; v < g.size(); ++v) {
    const Vec3& p = g.position(static_cast<ViewpointId>(v));
    json dirs = json::array();
    for (const auto& d : g.directions(static_cast<ViewpointId>(v))) {
      dirs.push_back({{"target", d.target},
                      {"length", d.length},
                      {"heading", d.heading},
                      {"elevation", d.elevation},
                      {"appearance", d.appearance}});
    }
    nodes.push_back({{"position", {p.x, p.y, p.z}}, {"landmark", g.landmark(static_cast<ViewpointId>(v))},
                     {"directions", std::move(dirs)}});
  }
  return nodes;
}

NavGraph graph_from_json(const json& nodes) {
  std::vector<Vec3> positions;
  std::vector<int> landmarks;
  std::vector<std::vector<Direction>> directions;
  for (const auto& n : nodes) {
    const auto& p = n.at("position");
    positions.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    landmarks.push_back(n.at("landmark").get<int>());
    std::vector<Direction> dirs;
    for (const auto& d : n.at("directions")) {
      dirs.push_back({d.at("target").get<int>(), d.at("length").get<double>(), d.at("heading").get<double>(),
                      d.at("elevation").get<double>(), d.at("appearance").get<std::vector<double>>()});
    }
    directions.push_back(std::move(dirs));
  }
  return NavGraph(std::move(positions), std::move(landmarks), std::move(directions));
}

json episode_to_json(const Episode& e) {
  return {{"id", e.id},       {"graph", e.graph}, {"split", split_name(e.split)}, {"instruction", e.instruction},
          {"start", e.start}, {"goal", e.goal},   {"path", e.path},               {"noise", e.noise}};
}

Episode episode_from_json(const json& j) {
  Episode e;
  e.id = j.at("id").get<int>();
  e.graph = j.at("graph").get<int>();
  e.split = parse_split(j.at("split").get<std::string>());
  e.instruction = j.at("instruction").get<std::vector<int>>();
  e.start = j.at("start").get<int>();
  e.goal = j.at("goal").get<int>();
  e.path = j.at("path").get<std::vector<int>>();
  e.noise = j.at("noise").get<double>();
  return e;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

}  // namespace

const std::vector<Episode>& Dataset::split(const std::string& name) const {
  const auto it = splits.find(name);
  if (it == splits.end()) throw std::invalid_argument("unknown split: " + name);
  return it->second;
}

Dataset build_dataset(const EnvConfig& config) {
  if (config.train_graphs < 1 || config.unseen_graphs < 0) throw std::invalid_argument("build_dataset: bad graph counts");
  if (config.graph.appearance_dim != config.features.appearance_dim) {
    throw std::invalid_argument("build_dataset: graph appearance_dim differs from feature appearance_dim");
  }
  Dataset data;
  data.config = config;
  std::vector<int> train_ids;
  std::vector<int> unseen_ids;
  for (int i = 0; i < config.train_graphs + config.unseen_graphs; ++i) {
    const bool unseen = i >= config.train_graphs;
    const auto index = static_cast<std::uint64_t>(unseen ? i - config.train_graphs : i);
    data.graphs.push_back(generate_graph(derive_seed(config.seed, unseen ? "unseen-graph" : "train-graph", index),
                                         config.graph));
    (unseen ? unseen_ids : train_ids).push_back(i);
  }
  data.splits["train"] = episodes_for(data, train_ids, config.train_episodes_per_graph, Split::kTrain, "train-episode");
  data.splits["seen"] = episodes_for(data, train_ids, config.seen_episodes_per_graph, Split::kSeenEval, "seen-episode");
  data.splits["unseen"] =
      episodes_for(data, unseen_ids, config.unseen_episodes_per_graph, Split::kUnseenEval, "unseen-episode");
  for (const char* name : kBaseSplits) {
    const std::string noisy = std::string(name) + "_noisy";
    data.splits[noisy] = noisy_twin(data, data.splits[name], noisy.c_str());
  }
  return data;
}

json to_json(const EnvConfig& c) {
  return {{"seed", c.seed},
          {"train_graphs", c.train_graphs},
          {"unseen_graphs", c.unseen_graphs},
          {"train_episodes_per_graph", c.train_episodes_per_graph},
          {"seen_episodes_per_graph", c.seen_episodes_per_graph},
          {"unseen_episodes_per_graph", c.unseen_episodes_per_graph},
          {"noise", c.noise},
          {"graph",
           {{"rows", c.graph.rows},
            {"cols", c.graph.cols},
            {"min_side", c.graph.min_side},
            {"max_side", c.graph.max_side},
            {"spacing_min", c.graph.spacing_min},
            {"spacing_max", c.graph.spacing_max},
            {"xy_jitter", c.graph.xy_jitter},
            {"z_jitter", c.graph.z_jitter},
            {"extra_edge_prob", c.graph.extra_edge_prob},
            {"diagonal_prob", c.graph.diagonal_prob},
            {"max_degree", c.graph.max_degree},
            {"appearance_dim", c.graph.appearance_dim},
            {"landmark_count", c.graph.landmark_count},
            {"feature_noise", c.graph.feature_noise},
            {"landmark_seed", c.graph.landmark_seed}}},
          {"episode", {{"min_edges", c.episode.min_edges}, {"max_edges", c.episode.max_edges}}},
          {"features", {{"appearance_dim", c.features.appearance_dim}, {"orient_tile", c.features.orient_tile}}}};
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig c;
  const auto get = [](const json& obj, const char* key, auto& field) {
    if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
  };
  get(j, "seed", c.seed);
  get(j, "train_graphs", c.train_graphs);
  get(j, "unseen_graphs", c.unseen_graphs);
  get(j, "train_episodes_per_graph", c.train_episodes_per_graph);
  get(j, "seen_episodes_per_graph", c.seen_episodes_per_graph);
  get(j, "unseen_episodes_per_graph", c.unseen_episodes_per_graph);
  get(j, "noise", c.noise);
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "full") {
      c.features = FeatureConfig::full();
    } else if (preset != "desk") {
      throw std::invalid_argument("unknown feature preset: " + preset);
    }
    c.graph.appearance_dim = c.features.appearance_dim;
  }
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    get(g, "rows", c.graph.rows);
    get(g, "cols", c.graph.cols);
    get(g, "min_side", c.graph.min_side);
    get(g, "max_side", c.graph.max_side);
    get(g, "spacing_min", c.graph.spacing_min);
    get(g, "spacing_max", c.graph.spacing_max);
    get(g, "xy_jitter", c.graph.xy_jitter);
    get(g, "z_jitter", c.graph.z_jitter);
    get(g, "extra_edge_prob", c.graph.extra_edge_prob);
    get(g, "diagonal_prob", c.graph.diagonal_prob);
    get(g, "max_degree", c.graph.max_degree);
    get(g, "appearance_dim", c.graph.appearance_dim);
    get(g, "landmark_count", c.graph.landmark_count);
    get(g, "feature_noise", c.graph.feature_noise);
    get(g, "landmark_seed", c.graph.landmark_seed);
  }
  if (j.contains("episode")) {
    get(j.at("episode"), "min_edges", c.episode.min_edges);
    get(j.at("episode"), "max_edges", c.episode.max_edges);
  }
  if (j.contains("features")) {
    get(j.at("features"), "appearance_dim", c.features.appearance_dim);
    get(j.at("features"), "orient_tile", c.features.orient_tile);
  }
  return c;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", to_json(data.config));
  json graphs = json::array();
  for (const auto& g : data.graphs) graphs.push_back(graph_to_json(g));
  write_json(dir / "graphs.json", graphs);
  for (const auto& [name, episodes] : data.splits) {
    json arr = json::array();
    for (const auto& e : episodes) arr.push_back(episode_to_json(e));
    write_json(dir / (name + ".json"), arr);
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset data;
  data.config = env_config_from_json(read_json(dir / "config.json"));
  for (const auto& g : read_json(dir / "graphs.json")) data.graphs.push_back(graph_from_json(g));
  for (const char* base : kBaseSplits) {
    for (const std::string& name : {std::string(base), std::string(base) + "_noisy"}) {
      std::vector<Episode> episodes;
      for (const auto& e : read_json(dir / (name + ".json"))) episodes.push_back(episode_from_json(e));
      data.splits[name] = std::move(episodes);
    }
  }
  return data;
}

}  // namespace rnav::env
