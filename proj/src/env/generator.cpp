#include "rnav/env/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rnav/core/rng.hpp"
#include "rnav/env/vocabulary.hpp"

namespace rnav::env {

LandmarkBank::LandmarkBank(int count, std::size_t dim, std::uint64_t seed) : dim_(dim) {
  Rng rng = make_rng(seed, "landmark-bank");
  std::normal_distribution<double> n01(0.0, 1.0);
  latents_.resize(static_cast<std::size_t>(count));
  for (auto& v : latents_) {
    v.resize(dim);
    for (double& x : v) x = n01(rng);
  }
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

}  // namespace

NavGraph generate_graph(std::uint64_t seed, const GraphParams& params) {
  if (params.appearance_dim == 0) throw std::invalid_argument("generate_graph: appearance_dim must be positive");
  if (params.landmark_count < 1 || params.landmark_count > Vocabulary::kLandmarkCount) {
    throw std::invalid_argument("generate_graph: landmark_count must be in [1, " +
                                std::to_string(Vocabulary::kLandmarkCount) + "]");
  }
  if (params.max_degree < 2) throw std::invalid_argument("generate_graph: max_degree must be >= 2");

  Rng rng = make_rng(seed, "graph");
  std::uniform_int_distribution<int> side(params.min_side, params.max_side);
  const int rows = params.rows > 0 ? params.rows : side(rng);
  const int cols = params.cols > 0 ? params.cols : side(rng);
  if (rows <= 0 || cols <= 0 || params.min_side <= 0) throw std::invalid_argument("generate_graph: graph has no viewpoints");
  const auto n = static_cast<std::size_t>(rows * cols);

  std::uniform_real_distribution<double> spacing_dist(params.spacing_min, params.spacing_max);
  std::uniform_real_distribution<double> jitter(-params.xy_jitter, params.xy_jitter);
  std::uniform_real_distribution<double> zjitter(-params.z_jitter, params.z_jitter);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> landmark_dist(0, params.landmark_count - 1);

  const double spacing = spacing_dist(rng);
  std::vector<Vec3> positions(n);
  std::vector<int> landmarks(n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto id = static_cast<std::size_t>(r * cols + c);
      positions[id] = {c * spacing + jitter(rng), r * spacing + jitter(rng), zjitter(rng)};
      landmarks[id] = landmark_dist(rng);
    }
  }
  const auto id_of = [cols](int r, int c) { return r * cols + c; };

  std::vector<std::pair<int, int>> axis;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) axis.emplace_back(id_of(r, c), id_of(r, c + 1));
      if (r + 1 < rows) axis.emplace_back(id_of(r, c), id_of(r + 1, c));
    }
  }
  std::shuffle(axis.begin(), axis.end(), rng);

  std::vector<std::vector<int>> adjacency(n);
  const auto degree = [&](int v) { return adjacency[static_cast<std::size_t>(v)].size(); };
  const auto link = [&](int a, int b) {
    adjacency[static_cast<std::size_t>(a)].push_back(b);
    adjacency[static_cast<std::size_t>(b)].push_back(a);
  };

  // Random spanning tree over the grid keeps every graph connected.
  DisjointSets sets(n);
  std::vector<std::pair<int, int>> rest;
  for (const auto& [a, b] : axis) {
    if (sets.unite(a, b)) {
      link(a, b);
    } else {
      rest.emplace_back(a, b);
    }
  }
  for (const auto& [a, b] : rest) {
    if (unit(rng) < params.extra_edge_prob && degree(a) < params.max_degree && degree(b) < params.max_degree) link(a, b);
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      if (unit(rng) >= params.diagonal_prob) continue;
      const bool main = unit(rng) < 0.5;
      const int a = main ? id_of(r, c) : id_of(r, c + 1);
      const int b = main ? id_of(r + 1, c + 1) : id_of(r + 1, c);
      if (degree(a) < params.max_degree && degree(b) < params.max_degree &&
          distance_between(positions[static_cast<std::size_t>(a)], positions[static_cast<std::size_t>(b)]) <= 3.5) {
        link(a, b);
      }
    }
  }

  const LandmarkBank bank(params.landmark_count, params.appearance_dim, params.landmark_seed);
  std::normal_distribution<double> noise(0.0, params.feature_noise);
  std::vector<std::vector<Direction>> directions(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& targets = adjacency[v];
    std::sort(targets.begin(), targets.end());
    for (int t : targets) {
      const Vec3& a = positions[v];
      const Vec3& b = positions[static_cast<std::size_t>(t)];
      Direction d;
      d.target = t;
      d.length = distance_between(a, b);
      d.heading = heading_between(a, b);
      d.elevation = elevation_between(a, b);
      const auto& latent = bank.latent(landmarks[static_cast<std::size_t>(t)]);
      d.appearance.resize(params.appearance_dim);
      for (std::size_t k = 0; k < params.appearance_dim; ++k) d.appearance[k] = latent[k] + noise(rng);
      directions[v].push_back(std::move(d));
    }
  }
  return NavGraph(std::move(positions), std::move(landmarks), std::move(directions));
}

}  // namespace rnav::env
