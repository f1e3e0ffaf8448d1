#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rnav/env/nav_graph.hpp"

namespace rnav::env {

// Layout: a jittered grid whose axis edges form a random spanning tree plus
// extra axis edges, with occasional diagonal shortcuts. Defaults give 25-49
// viewpoints and edge lengths between 2.0 and 3.5 m.
struct GraphParams {
  int rows = 0;  // 0 = uniform in [min_side, max_side]
  int cols = 0;
  int min_side = 5;
  int max_side = 7;
  double spacing_min = 2.2;
  double spacing_max = 2.35;
  double xy_jitter = 0.08;
  double z_jitter = 0.1;
  double extra_edge_prob = 0.55;
  double diagonal_prob = 0.2;
  std::size_t max_degree = 6;
  std::size_t appearance_dim = 64;
  int landmark_count = 20;
  double feature_noise = 0.1;
  std::uint64_t landmark_seed = 7;
};

// Latent appearance vector per landmark category, shared by every graph built
// from the same landmark_seed so grounding learned on one graph transfers.
class LandmarkBank {
 public:
  LandmarkBank(int count, std::size_t dim, std::uint64_t seed);

  int count() const { return static_cast<int>(latents_.size()); }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& latent(int landmark) const { return latents_.at(static_cast<std::size_t>(landmark)); }

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> latents_;
};

// Throws std::invalid_argument on degenerate parameters (no viewpoints,
// landmark_count outside the vocabulary, zero appearance dim).
NavGraph generate_graph(std::uint64_t seed, const GraphParams& params = {});

}  // namespace rnav::env
