#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rnav/ad/lstm.hpp"
#include "rnav/ad/ops.hpp"
#include "rnav/ad/parameters.hpp"
#include "rnav/ad/tape.hpp"
#include "rnav/env/observation.hpp"

namespace rnav::agent {

using ad::Mask;
using ad::Tensor;
using ad::Var;
using env::ViewpointId;

enum class OscillationPolicy {
  kOneStep,     // block the undoing move only at the step right after a rollback
  kPersistent,  // keep every undoing move blocked for the rest of the episode
};

struct AgentConfig {
  std::size_t vocab = 64;
  std::size_t embed = 32;
  std::size_t hidden = 32;
  std::size_t proj = 64;  // g-network output and forward/rollback embedding width
  env::FeatureConfig features;
  std::size_t max_instruction = 40;  // L_max: width of the attention block fed to the progress head
  std::size_t marker_tile = 4;
  int max_steps = 20;
  double dropout = 0.2;
  bool regret = true;
  bool marker = true;
  OscillationPolicy oscillation = OscillationPolicy::kOneStep;

  std::size_t feature_dim() const { return features.feature_dim(); }
  // Width of the candidate vectors scored against W_fr.
  std::size_t scored_dim() const { return proj + (marker ? marker_tile : 0); }
  bool uses_fr() const { return regret || marker; }

  static AgentConfig desk();
  static AgentConfig full();
};

nlohmann::json to_json(const AgentConfig& c);
AgentConfig agent_config_from_json(const nlohmann::json& j);

// Moments of the inputs of one standardization layer, accumulated over an
// update batch and folded into the running statistics afterwards.
struct NormMoments {
  Tensor sum;
  Tensor sum_sq;
  double count = 0.0;

  void add_rows(const Tensor& x);
  void merge(const NormMoments& other);
};

struct NormAccumulator {
  NormMoments input;
  NormMoments output;
  void merge(const NormAccumulator& other);
};

// Parameter leaves of one agent bound to one tape.
struct Bound {
  Var embedding;
  ad::LstmWeights encoder;
  Var bn_in_gamma, bn_in_beta, fc_w, fc_b, bn_out_gamma, bn_out_beta;
  Var w_x, w_v;
  ad::LstmWeights decoder;
  Var w_h, b_h, w_pm, b_pm;
  Var w_a;
  Var w_r, b_r;
  Var w_fr;  // invalid when neither regret nor marker is enabled
  mutable ad::RunningStats bn_in_stats;
  mutable ad::RunningStats bn_out_stats;
};

struct Encoded {
  Var context;  // [L, H]
  ad::LstmState final;
};

struct Grounding {
  Var x_hat;  // [1, H]
  Var v_hat;  // [1, P]
  Var alpha;  // [1, L]
  Var beta;   // [1, K]
};

struct RegretOutput {
  Var m_fr;   // [1, P]
  Var alpha;  // [1, 2] forward/rollback weights
  Var m_f;    // [1, P] forward embedding
};

enum class ActionMode { kSample, kGreedy, kForced };

// The values an agent step feeds forward without gradient. Replaying them
// holds the stop-gradient inputs fixed, e.g. for finite-difference checks.
struct DetachedInputs {
  double delta_progress = 0.0;
  std::vector<double> marker_delta;
};

struct StepOptions {
  ActionMode mode = ActionMode::kGreedy;
  bool training = false;  // enables dropout
  bool block_rollback = false;
  int forced_action = -1;  // slot index for ActionMode::kForced
  NormAccumulator* moments = nullptr;
  const DetachedInputs* replay = nullptr;
};

struct AgentState {
  ad::LstmState hc;
  Var a_prev;
  ViewpointId viewpoint = -1;
  std::optional<ViewpointId> prev_viewpoint;
  std::map<ViewpointId, double> markers;
  double last_progress = 0.0;
  int t = 0;
  bool stopped = false;
  std::vector<std::pair<ViewpointId, ViewpointId>> blocked;  // (from, to) moves undoing a rollback
};

struct StepDecision {
  Var logits;     // [1, K] unmasked scores
  Var probs;      // [1, K] masked softmax
  Var log_probs;  // [1, K] masked log-softmax, 0 on masked slots
  Var progress;   // [1, 1] p_pm
  Mask mask;
  std::array<double, 2> alpha_fr{1.0, 0.0};
  std::vector<double> marker_values;
  DetachedInputs detached;
  Tensor text_attention;
  int action = 0;
  bool rollback = false;
  bool forced_stop = false;
  ViewpointId from = -1;
  ViewpointId to = -1;  // viewpoint after the action (== from on stop)

  // Intermediate activations, exposed for equivalence checks.
  Var h;
  Var x_hat;
  Var g;
  Var m_f;
};

class Agent {
 public:
  Agent(const AgentConfig& config, std::uint64_t seed);

  const AgentConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  Bound bind(ad::Tape& tape, bool track) const;

  Encoded encode_instruction(const Bound& b, std::span<const int> tokens, Rng* rng, bool training) const;
  // g-network: standardize -> FC -> standardize -> dropout -> ReLU, one row per slot.
  Var project(const Bound& b, Var features, Rng* rng, bool training, NormAccumulator* moments) const;
  Var feature_matrix(ad::Tape& tape, const env::PanoramaObservation& obs) const;

  AgentState initial_state(const Bound& b, const Encoded& enc, ViewpointId start) const;
  StepDecision step(const Bound& b, AgentState& state, const env::PanoramaObservation& obs, const Encoded& enc,
                    const StepOptions& opts, Rng& rng) const;

  // Folds batch moments into the running statistics of both standardization layers.
  void update_norm_stats(const NormAccumulator& acc);

 private:
  AgentConfig config_;
  ad::ParameterSet params_;
};

// Component operations, usable on their own.
Grounding co_ground(const Bound& b, Var h_prev, Var context, Var g, const Mask& valid);
ad::LstmState decode_step(const Bound& b, Var x_hat, Var v_hat, Var a_prev, Var h_prev, Var c_prev);
Var progress_monitor(const Bound& b, Var h_prev, Var v_hat, Var c, Var alpha, std::size_t max_instruction);
// delta_progress must come from detached progress values. rollback == invalid
// forces pure forward weighting.
RegretOutput regret_module(const Bound& b, Var h, Var x_hat, Var rollback, double delta_progress);

void marker_update(std::map<ViewpointId, double>& markers, ViewpointId v, double progress);
// Slot 0 (stop) -> 0, visited target -> stored estimate, unvisited -> 1.
double marker_lookup(const std::map<ViewpointId, double>& markers, const env::PanoramaObservation& obs,
                     std::size_t slot);

int sample_index(const Tensor& probs, Rng& rng);
int argmax_index(const Tensor& probs, const Mask& mask);

}  // namespace rnav::agent
