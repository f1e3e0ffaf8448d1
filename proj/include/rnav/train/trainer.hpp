#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rnav/agent/agent.hpp"
#include "rnav/env/dataset.hpp"
#include "rnav/eval/metrics.hpp"
#include "rnav/train/optimizer.hpp"
#include "rnav/train/rollout.hpp"

namespace rnav::train {

struct TrainConfig {
  LossWeights loss;
  AdamConfig adam{.lr = 1e-2};  // the optimizer default of 1e-3 learns too slowly here
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 1;
  int patience = 10;  // epochs without a better selection-split SR before stopping; <= 0 disables
  double success_threshold = 3.0;
  int workers = 1;
  std::string train_split = "train";
  std::vector<std::string> eval_splits{"seen", "unseen"};
  std::string select_split = "unseen";
  std::size_t train_eval_episodes = 200;  // greedy evaluation on a prefix of the training split; 0 skips
};

struct CurveRecord {
  int epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

struct TrainResult {
  int best_epoch = 0;
  double best_sr = 0.0;
  int epochs_run = 0;
  int updates = 0;
  int skipped_updates = 0;
  bool non_finite_loss = false;
  std::vector<CurveRecord> curve;
};

using CurveSink = std::function<void(const CurveRecord&)>;

// Trains in place; on return the agent holds the parameters of the best epoch
// on the selection split (epoch 0 = initialization).
TrainResult train(agent::Agent& agent, const env::Dataset& data, const TrainConfig& config,
                  const CurveSink& sink = {});

struct InferenceOptions {
  bool block_rollback = false;
  int workers = 1;
  std::uint64_t seed = 1;
};

// Greedy rollouts without gradient tracking, one per episode, in episode order.
std::vector<eval::TrajectoryResult> infer(const agent::Agent& agent, const env::Dataset& data,
                                          const std::vector<env::Episode>& episodes, const InferenceOptions& opts);

}  // namespace rnav::train
