#include "rnav/agent/agent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rnav::agent {

using ad::Shape;
using ad::Tape;

AgentConfig AgentConfig::desk() { return {}; }

AgentConfig AgentConfig::full() {
  AgentConfig c;
  c.embed = 256;
  c.hidden = 512;
  c.proj = 1024;
  c.features = env::FeatureConfig::full();
  c.marker_tile = 32;
  c.dropout = 0.5;
  return c;
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"vocab", c.vocab},
          {"embed", c.embed},
          {"hidden", c.hidden},
          {"proj", c.proj},
          {"appearance_dim", c.features.appearance_dim},
          {"orient_tile", c.features.orient_tile},
          {"max_instruction", c.max_instruction},
          {"marker_tile", c.marker_tile},
          {"max_steps", c.max_steps},
          {"dropout", c.dropout},
          {"regret", c.regret},
          {"marker", c.marker},
          {"oscillation", c.oscillation == OscillationPolicy::kOneStep ? "one-step" : "persistent"}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig c;
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "full") {
      c = AgentConfig::full();
    } else if (preset != "desk") {
      throw std::invalid_argument("unknown agent preset: " + preset);
    }
  }
  const auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("vocab", c.vocab);
  get("embed", c.embed);
  get("hidden", c.hidden);
  get("proj", c.proj);
  get("appearance_dim", c.features.appearance_dim);
  get("orient_tile", c.features.orient_tile);
  get("max_instruction", c.max_instruction);
  get("marker_tile", c.marker_tile);
  get("max_steps", c.max_steps);
  get("dropout", c.dropout);
  get("regret", c.regret);
  get("marker", c.marker);
  if (j.contains("oscillation")) {
    const auto o = j.at("oscillation").get<std::string>();
    if (o == "one-step") {
      c.oscillation = OscillationPolicy::kOneStep;
    } else if (o == "persistent") {
      c.oscillation = OscillationPolicy::kPersistent;
    } else {
      throw std::invalid_argument("unknown oscillation policy: " + o);
    }
  }
  if (c.hidden == 0 || c.embed == 0 || c.proj == 0 || c.max_instruction == 0 || c.max_steps <= 0) {
    throw std::invalid_argument("agent config: dimensions and max_steps must be positive");
  }
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw std::invalid_argument("agent config: dropout must be in [0, 1)");
  return c;
}

void NormMoments::add_rows(const Tensor& x) {
  if (sum.empty()) {
    sum = Tensor(Shape{1, x.cols()});
    sum_sq = Tensor(Shape{1, x.cols()});
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      sum[c] += x(r, c);
      sum_sq[c] += x(r, c) * x(r, c);
    }
  }
  count += static_cast<double>(x.rows());
}

void NormMoments::merge(const NormMoments& other) {
  if (other.count == 0.0) return;
  if (sum.empty()) {
    *this = other;
    return;
  }
  sum += other.sum;
  sum_sq += other.sum_sq;
  count += other.count;
}

void NormAccumulator::merge(const NormAccumulator& other) {
  input.merge(other.input);
  output.merge(other.output);
}

namespace {

Tensor uniform(Shape s, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(s);
  for (double& v : t.values()) v = u(rng);
  return t;
}

Tensor fan_in_uniform(Shape s, Rng& rng) { return uniform(s, 1.0 / std::sqrt(static_cast<double>(s.rows)), rng); }

void add_lstm(ad::ParameterSet& p, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng) {
  const ad::LstmShapes shapes = ad::lstm_shapes(in, hidden);
  p.add(prefix + ".weight", uniform(shapes.weight, 1.0 / std::sqrt(static_cast<double>(hidden)), rng));
  Tensor bias(shapes.bias);
  for (std::size_t k = hidden; k < 2 * hidden; ++k) bias[k] = 1.0;  // forget gate
  p.add(prefix + ".bias", std::move(bias));
}

Tensor ones(std::size_t n) { return Tensor(Shape{1, n}, 1.0); }
Tensor zeros(std::size_t n) { return Tensor(Shape{1, n}, 0.0); }

Var param(Tape& t, const ad::ParameterSet& p, const char* name, bool track) {
  return t.parameter(p, p.index_of(name), track);
}

ad::RunningStats stats_of(const ad::ParameterSet& p, const char* mean, const char* var) {
  ad::RunningStats s;
  s.mean = p[p.index_of(mean)].value;
  s.var = p[p.index_of(var)].value;
  return s;
}

// Unbiased variance from accumulated moments.
std::pair<Tensor, Tensor> moments_to_stats(const NormMoments& m) {
  Tensor mean = m.sum;
  mean *= 1.0 / m.count;
  Tensor var(mean.shape());
  for (std::size_t c = 0; c < mean.cols(); ++c) {
    const double biased = std::max(0.0, m.sum_sq[c] / m.count - mean[c] * mean[c]);
    var[c] = biased * m.count / (m.count - 1.0);
  }
  return {mean, var};
}

}  // namespace

Agent::Agent(const AgentConfig& config, std::uint64_t seed) : config_(config) {
  Rng rng = make_rng(seed, "agent-init");
  const std::size_t E = config.embed, H = config.hidden, P = config.proj, F = config.feature_dim();
  params_.add("embedding", uniform(Shape{config.vocab, E}, 0.1, rng));
  add_lstm(params_, "encoder", E, H, rng);
  params_.add("g.bn_in.gamma", ones(F));
  params_.add("g.bn_in.beta", zeros(F));
  params_.add("g.bn_in.mean", zeros(F), false);
  params_.add("g.bn_in.var", ones(F), false);
  params_.add("g.fc.weight", fan_in_uniform(Shape{F, P}, rng));
  params_.add("g.fc.bias", zeros(P));
  params_.add("g.bn_out.gamma", ones(P));
  params_.add("g.bn_out.beta", zeros(P));
  params_.add("g.bn_out.mean", zeros(P), false);
  params_.add("g.bn_out.var", ones(P), false);
  params_.add("W_x", fan_in_uniform(Shape{H, H}, rng));
  params_.add("W_v", fan_in_uniform(Shape{H, P}, rng));
  add_lstm(params_, "decoder", H + P + P, H, rng);
  params_.add("W_h", fan_in_uniform(Shape{H + P, H}, rng));
  params_.add("b_h", zeros(H));
  params_.add("W_pm", fan_in_uniform(Shape{config.max_instruction + H, 1}, rng));
  params_.add("b_pm", zeros(1));
  params_.add("W_a", fan_in_uniform(Shape{2 * H, P}, rng));
  params_.add("W_r", zeros(2));
  params_.add("b_r", zeros(2));
  if (config.uses_fr()) params_.add("W_fr", fan_in_uniform(Shape{P, config.scored_dim()}, rng));
}

Bound Agent::bind(Tape& t, bool track) const {
  const auto& p = params_;
  Bound b;
  b.embedding = param(t, p, "embedding", track);
  b.encoder = {param(t, p, "encoder.weight", track), param(t, p, "encoder.bias", track)};
  b.bn_in_gamma = param(t, p, "g.bn_in.gamma", track);
  b.bn_in_beta = param(t, p, "g.bn_in.beta", track);
  b.fc_w = param(t, p, "g.fc.weight", track);
  b.fc_b = param(t, p, "g.fc.bias", track);
  b.bn_out_gamma = param(t, p, "g.bn_out.gamma", track);
  b.bn_out_beta = param(t, p, "g.bn_out.beta", track);
  b.w_x = param(t, p, "W_x", track);
  b.w_v = param(t, p, "W_v", track);
  b.decoder = {param(t, p, "decoder.weight", track), param(t, p, "decoder.bias", track)};
  b.w_h = param(t, p, "W_h", track);
  b.b_h = param(t, p, "b_h", track);
  b.w_pm = param(t, p, "W_pm", track);
  b.b_pm = param(t, p, "b_pm", track);
  b.w_a = param(t, p, "W_a", track);
  b.w_r = param(t, p, "W_r", track);
  b.b_r = param(t, p, "b_r", track);
  if (config_.uses_fr()) b.w_fr = param(t, p, "W_fr", track);
  b.bn_in_stats = stats_of(p, "g.bn_in.mean", "g.bn_in.var");
  b.bn_out_stats = stats_of(p, "g.bn_out.mean", "g.bn_out.var");
  return b;
}

Encoded Agent::encode_instruction(const Bound& b, std::span<const int> tokens, Rng* rng, bool training) const {
  if (tokens.empty()) throw std::invalid_argument("encode_instruction: empty instruction");
  for (const int tok : tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= config_.vocab) {
      throw std::out_of_range("encode_instruction: token " + std::to_string(tok) + " outside vocabulary");
    }
  }
  Tape& t = *b.embedding.tape();
  Var emb = ad::embedding(b.embedding, tokens);
  if (training && rng) emb = ad::dropout(emb, config_.dropout, *rng, true);
  ad::LstmState s{t.constant(Tensor(Shape{1, config_.hidden})), t.constant(Tensor(Shape{1, config_.hidden}))};
  std::vector<Var> outputs;
  outputs.reserve(tokens.size());
  for (std::size_t l = 0; l < tokens.size(); ++l) {
    s = ad::lstm_cell(ad::select_row(emb, l), s.h, s.c, b.encoder);
    outputs.push_back(s.h);
  }
  return {ad::concat_rows(outputs), s};
}

Var Agent::feature_matrix(Tape& t, const env::PanoramaObservation& obs) const {
  const std::size_t F = config_.feature_dim();
  Tensor m(Shape{obs.slots(), F});
  for (std::size_t k = 0; k < obs.slots(); ++k) {
    if (obs.features[k].size() != F) {
      throw ad::ShapeError("feature_matrix: observation feature width " + std::to_string(obs.features[k].size()) +
                           " does not match agent feature width " + std::to_string(F));
    }
    std::copy(obs.features[k].begin(), obs.features[k].end(), m.values().begin() + static_cast<std::ptrdiff_t>(k * F));
  }
  return t.constant(std::move(m));
}

Var Agent::project(const Bound& b, Var features, Rng* rng, bool training, NormAccumulator* moments) const {
  if (moments) moments->input.add_rows(features.value());
  Var x = ad::batch_standardize(features, b.bn_in_gamma, b.bn_in_beta, b.bn_in_stats, ad::NormMode::kRunning);
  x = ad::add_row(ad::matmul(x, b.fc_w), b.fc_b);
  if (moments) moments->output.add_rows(x.value());
  x = ad::batch_standardize(x, b.bn_out_gamma, b.bn_out_beta, b.bn_out_stats, ad::NormMode::kRunning);
  if (training && rng) x = ad::dropout(x, config_.dropout, *rng, true);
  return ad::relu(x);
}

void Agent::update_norm_stats(const NormAccumulator& acc) {
  const auto fold = [this](const NormMoments& m, const char* mean_name, const char* var_name) {
    if (m.count < 2.0) return;
    ad::RunningStats s = stats_of(params_, mean_name, var_name);
    const auto [mean, var] = moments_to_stats(m);
    ad::update_running_stats(s, mean, var);
    params_[params_.index_of(mean_name)].value = s.mean;
    params_[params_.index_of(var_name)].value = s.var;
  };
  fold(acc.input, "g.bn_in.mean", "g.bn_in.var");
  fold(acc.output, "g.bn_out.mean", "g.bn_out.var");
}

AgentState Agent::initial_state(const Bound& b, const Encoded& enc, ViewpointId start) const {
  Tape& t = *b.embedding.tape();
  AgentState s;
  s.hc = enc.final;
  s.a_prev = t.constant(Tensor(Shape{1, config_.proj}));
  s.viewpoint = start;
  return s;
}

Grounding co_ground(const Bound& b, Var h_prev, Var context, Var g, const Mask& valid) {
  Grounding out;
  out.alpha = ad::softmax(ad::matmul_nt(ad::matmul(h_prev, b.w_x), context));
  out.x_hat = ad::matmul(out.alpha, context);
  out.beta = ad::softmax(ad::matmul_nt(ad::matmul(h_prev, b.w_v), g), valid);
  out.v_hat = ad::matmul(out.beta, g);
  return out;
}

ad::LstmState decode_step(const Bound& b, Var x_hat, Var v_hat, Var a_prev, Var h_prev, Var c_prev) {
  const Var parts[] = {x_hat, v_hat, a_prev};
  return ad::lstm_cell(ad::concat_cols(parts), h_prev, c_prev, b.decoder);
}

Var progress_monitor(const Bound& b, Var h_prev, Var v_hat, Var c, Var alpha, std::size_t max_instruction) {
  const Var gate_in[] = {h_prev, v_hat};
  Var h_pm = ad::mul(ad::sigmoid(ad::add_row(ad::matmul(ad::concat_cols(gate_in), b.w_h), b.b_h)), ad::tanh(c));
  const Var head_in[] = {ad::pad_cols(alpha, max_instruction), h_pm};
  return ad::tanh(ad::add_row(ad::matmul(ad::concat_cols(head_in), b.w_pm), b.b_pm));
}

RegretOutput regret_module(const Bound& b, Var h, Var x_hat, Var rollback, double delta_progress) {
  Tape& t = *h.tape();
  const Var fwd_in[] = {h, x_hat};
  Var m_f = ad::matmul(ad::concat_cols(fwd_in), b.w_a);
  if (!rollback.valid()) return {m_f, t.constant(Tensor::row({1.0, 0.0})), m_f};
  Var dp = t.constant(Tensor::scalar(delta_progress));
  Var alpha = ad::softmax(ad::add_row(ad::matmul(dp, b.w_r), b.b_r));
  const Var both[] = {m_f, rollback};
  return {ad::matmul(alpha, ad::concat_rows(both)), alpha, m_f};
}

void marker_update(std::map<ViewpointId, double>& markers, ViewpointId v, double progress) { markers[v] = progress; }

double marker_lookup(const std::map<ViewpointId, double>& markers, const env::PanoramaObservation& obs,
                     std::size_t slot) {
  if (slot == 0) return 0.0;
  const auto it = markers.find(obs.targets.at(slot));
  return it == markers.end() ? 1.0 : it->second;
}

int sample_index(const Tensor& probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last = -1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last = static_cast<int>(k);
    if (r < acc) return last;
  }
  return last;
}

int argmax_index(const Tensor& probs, const Mask& mask) {
  int best = -1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!mask.empty() && !mask[k]) continue;
    if (best < 0 || probs[k] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

StepDecision Agent::step(const Bound& b, AgentState& state, const env::PanoramaObservation& obs,
                         const Encoded& enc, const StepOptions& opts, Rng& rng) const {
  if (state.stopped) throw std::logic_error("step: episode already stopped");
  if (obs.viewpoint != state.viewpoint) throw std::invalid_argument("step: observation is for another viewpoint");
  Tape& t = *b.embedding.tape();
  const std::size_t K = obs.slots();

  StepDecision d;
  d.from = state.viewpoint;
  Var g = project(b, feature_matrix(t, obs), &rng, opts.training, opts.moments);
  d.g = g;

  const Grounding gr = co_ground(b, state.hc.h, enc.context, g, obs.valid);
  const ad::LstmState next = decode_step(b, gr.x_hat, gr.v_hat, state.a_prev, state.hc.h, state.hc.c);
  d.progress = progress_monitor(b, state.hc.h, gr.v_hat, next.c, gr.alpha, config_.max_instruction);
  d.text_attention = gr.alpha.value();
  d.h = next.h;
  d.x_hat = gr.x_hat;
  const double p_now = d.progress.item();

  // Regret: weigh the forward embedding against the direction back to the previous viewpoint.
  Var rollback_embedding;
  int rollback_slot = -1;
  if (state.prev_viewpoint) rollback_slot = obs.slot_of(*state.prev_viewpoint);
  if (config_.regret && rollback_slot > 0) {
    rollback_embedding = ad::select_row(g, static_cast<std::size_t>(rollback_slot));
  }
  d.detached.delta_progress = opts.replay ? opts.replay->delta_progress : p_now - state.last_progress;
  RegretOutput reg = regret_module(b, next.h, gr.x_hat, config_.regret ? rollback_embedding : Var{},
                                   d.detached.delta_progress);
  d.m_f = reg.m_f;
  d.alpha_fr = {reg.alpha.value()[0], reg.alpha.value()[1]};

  // Candidates: projected features, optionally marked with detached progress differences.
  Var candidates = g;
  d.marker_values.resize(K);
  d.detached.marker_delta.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    d.marker_values[k] = marker_lookup(state.markers, obs, k);
    d.detached.marker_delta[k] = p_now - d.marker_values[k];
  }
  if (opts.replay) {
    if (opts.replay->marker_delta.size() != K) throw std::invalid_argument("step: replayed marker width differs");
    d.detached.marker_delta = opts.replay->marker_delta;
  }
  if (config_.marker) {
    Var delta = t.constant(Tensor(Shape{K, 1}, d.detached.marker_delta));
    const Var parts[] = {g, ad::tile_cols(delta, config_.marker_tile)};
    candidates = ad::concat_cols(parts);
  }
  d.logits = config_.uses_fr() ? ad::matmul_nt(ad::matmul(reg.m_fr, b.w_fr), candidates)
                               : ad::matmul_nt(reg.m_fr, candidates);

  // Masks: validity, oscillation after a rollback, and the rollback-blocking ablation.
  d.mask = obs.valid;
  for (const auto& [from, to] : state.blocked) {
    if (from != state.viewpoint) continue;
    const int slot = obs.slot_of(to);
    if (slot > 0) d.mask[static_cast<std::size_t>(slot)] = 0;
  }
  if (opts.block_rollback && rollback_slot > 0 && K > 2) d.mask[static_cast<std::size_t>(rollback_slot)] = 0;

  d.probs = ad::softmax(d.logits, d.mask);
  d.log_probs = ad::log_softmax(d.logits, d.mask);

  switch (opts.mode) {
    case ActionMode::kSample: d.action = sample_index(d.probs.value(), rng); break;
    case ActionMode::kGreedy: d.action = argmax_index(d.probs.value(), d.mask); break;
    case ActionMode::kForced:
      if (opts.forced_action < 0 || static_cast<std::size_t>(opts.forced_action) >= K) {
        throw std::out_of_range("step: forced action outside the candidate list");
      }
      d.action = opts.forced_action;
      break;
  }
  if (state.t + 1 >= config_.max_steps && d.action != 0) {
    // The move is still executed; the episode ends on arrival.
    d.forced_stop = true;
  }

  const auto a = static_cast<std::size_t>(d.action);
  d.to = d.action == 0 ? state.viewpoint : obs.targets[a];
  d.rollback = d.action != 0 && state.prev_viewpoint && d.to == *state.prev_viewpoint;

  marker_update(state.markers, state.viewpoint, p_now);
  if (config_.oscillation == OscillationPolicy::kOneStep) state.blocked.clear();
  if (d.rollback) state.blocked.emplace_back(d.to, state.viewpoint);
  state.hc = next;
  state.a_prev = d.action == 0 ? t.constant(Tensor(Shape{1, config_.proj})) : ad::select_row(g, a);
  state.last_progress = p_now;
  if (d.action != 0) {
    state.prev_viewpoint = state.viewpoint;
    state.viewpoint = d.to;
  }
  ++state.t;
  state.stopped = d.action == 0 || d.forced_stop;
  return d;
}

}  // namespace rnav::agent
