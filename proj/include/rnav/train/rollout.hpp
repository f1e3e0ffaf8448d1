#pragma once

#include <vector>

#include "rnav/agent/agent.hpp"
#include "rnav/env/dataset.hpp"
#include "rnav/eval/metrics.hpp"

namespace rnav::train {

struct RolloutOptions {
  agent::ActionMode mode = agent::ActionMode::kGreedy;  // kForced follows the ground-truth action
  bool training = false;
  bool block_rollback = false;
  agent::NormAccumulator* moments = nullptr;
  const std::vector<agent::DetachedInputs>* replay = nullptr;  // one entry per step
};

struct Rollout {
  std::vector<agent::StepDecision> steps;
  std::vector<int> action_targets;        // y^nv at the agent's actual viewpoint
  std::vector<double> progress_targets;   // y^pm at the agent's actual viewpoint
  eval::TrajectoryResult trajectory;
  agent::AgentState final_state;
};

// Runs the agent on one episode on `tape` until it stops or reaches max steps.
Rollout rollout(const agent::Agent& agent, const agent::Bound& bound, const env::NavGraph& graph,
                const env::Episode& episode, const RolloutOptions& opts, Rng& rng);

struct LossWeights {
  double lambda = 0.5;
  double beta = 0.01;
};

// lambda * sum CE + (1 - lambda) * sum (y_pm - p_pm)^2 - beta * sum entropy.
// A target slot masked out at that step contributes no cross-entropy.
ad::Var rollout_loss(const Rollout& r, const LossWeights& w);

}  // namespace rnav::train
