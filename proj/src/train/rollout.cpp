#include "rnav/train/rollout.hpp"

#include <stdexcept>

#include "rnav/env/oracle.hpp"

namespace rnav::train {

Rollout rollout(const agent::Agent& agent, const agent::Bound& bound, const env::NavGraph& graph,
                const env::Episode& episode, const RolloutOptions& opts, Rng& rng) {
  const env::GoalOracle oracle(graph, episode.goal);
  const double d0 = oracle.distance(episode.start);
  if (!(d0 > 0.0)) throw std::invalid_argument("rollout: episode start equals goal");

  Rollout r;
  r.trajectory.episode = episode.id;
  r.trajectory.graph = episode.graph;
  r.trajectory.start = episode.start;
  r.trajectory.goal = episode.goal;
  r.trajectory.visited.push_back(episode.start);

  const agent::Encoded enc = agent.encode_instruction(bound, episode.instruction, &rng, opts.training);
  agent::AgentState state = agent.initial_state(bound, enc, episode.start);
  while (!state.stopped) {
    const env::PanoramaObservation obs = env::observe(graph, state.viewpoint, agent.config().features);
    const env::ViewpointId here = state.viewpoint;
    const env::ViewpointId hop = oracle.next_hop(here);
    const int target = hop == here ? 0 : obs.slot_of(hop);
    agent::StepOptions so;
    so.mode = opts.mode;
    so.training = opts.training;
    so.block_rollback = opts.block_rollback;
    so.forced_action = target;
    so.moments = opts.moments;
    if (opts.replay) so.replay = &opts.replay->at(r.steps.size());
    agent::StepDecision d = agent.step(bound, state, obs, enc, so, rng);

    r.action_targets.push_back(target);
    r.progress_targets.push_back((d0 - oracle.distance(here)) / d0);
    r.trajectory.progress.push_back(d.progress.item());
    ++r.trajectory.steps;
    if (d.action != 0) {
      r.trajectory.length += *graph.edge_length(here, d.to);
      r.trajectory.visited.push_back(d.to);
      if (d.rollback) ++r.trajectory.rollbacks;
    }
    r.steps.push_back(std::move(d));
  }
  r.final_state = std::move(state);
  return r;
}

ad::Var rollout_loss(const Rollout& r, const LossWeights& w) {
  if (r.steps.empty()) throw std::invalid_argument("rollout_loss: empty rollout");
  ad::Tape& t = *r.steps.front().probs.tape();
  std::vector<ad::Var> terms;
  terms.reserve(3 * r.steps.size());
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& d = r.steps[i];
    const auto y = static_cast<std::size_t>(r.action_targets[i]);
    if (w.lambda > 0.0 && d.mask[y]) terms.push_back(ad::scale(ad::element(d.log_probs, 0, y), -w.lambda));
    if (w.lambda < 1.0) {
      ad::Var err = ad::sub(d.progress, t.constant(ad::Tensor::scalar(r.progress_targets[i])));
      terms.push_back(ad::scale(ad::square(err), 1.0 - w.lambda));
    }
    // -beta * entropy = beta * sum p log p; masked slots have p = 0 and log p = 0.
    if (w.beta > 0.0) terms.push_back(ad::scale(ad::dot(d.probs, d.log_probs), w.beta));
  }
  if (terms.empty()) return t.constant(ad::Tensor::scalar(0.0));
  ad::Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = ad::add(total, terms[i]);
  return total;
}

}  // namespace rnav::train
