#pragma once

#include <vector>

#include "rnav/ad/parameters.hpp"

namespace rnav::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

class Adam {
 public:
  explicit Adam(const ad::ParameterSet& params, AdamConfig config = {});

  // Clips the global gradient norm, then updates every trainable parameter.
  // Returns false and leaves parameters untouched if any gradient is non-finite.
  bool step(ad::ParameterSet& params, ad::GradientSet& grads);

  int steps() const { return t_; }
  int skipped() const { return skipped_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<ad::Tensor> m_;
  std::vector<ad::Tensor> v_;
  int t_ = 0;
  int skipped_ = 0;
};

}  // namespace rnav::train
