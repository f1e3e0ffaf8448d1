#include "rnav/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rnav/core/parallel.hpp"

namespace rnav::train {

std::vector<eval::TrajectoryResult> infer(const agent::Agent& agent, const env::Dataset& data,
                                          const std::vector<env::Episode>& episodes, const InferenceOptions& opts) {
  std::vector<eval::TrajectoryResult> out(episodes.size());
  parallel_for(episodes.size(), opts.workers, [&](std::size_t i) {
    ad::Tape tape;
    const agent::Bound b = agent.bind(tape, false);
    Rng rng = make_rng(opts.seed, "inference", static_cast<std::uint64_t>(i));
    RolloutOptions ro;
    ro.mode = agent::ActionMode::kGreedy;
    ro.block_rollback = opts.block_rollback;
    out[i] = rollout(agent, b, data.graph_of(episodes[i]), episodes[i], ro, rng).trajectory;
  });
  return out;
}

namespace {

struct EpisodeGrad {
  ad::GradientSet grads;
  agent::NormAccumulator moments;
  double loss = 0.0;
};

void emit(TrainResult& result, const CurveSink& sink, CurveRecord rec) {
  if (sink) sink(rec);
  result.curve.push_back(std::move(rec));
}

void record_eval(TrainResult& result, const CurveSink& sink, int epoch, const std::string& split,
                 const eval::MetricSummary& m) {
  emit(result, sink, {epoch, split, "sr", m.sr});
  emit(result, sink, {epoch, split, "spl", m.spl});
  emit(result, sink, {epoch, split, "ne", m.ne});
  emit(result, sink, {epoch, split, "osr", m.osr});
}

// Evaluates every configured split; returns the selection split's SR.
double evaluate_epoch(const agent::Agent& agent, const env::Dataset& data, const TrainConfig& config, int epoch,
                      TrainResult& result, const CurveSink& sink) {
  InferenceOptions io;
  io.workers = config.workers;
  io.seed = config.seed;
  double select = 0.0;
  if (config.train_eval_episodes > 0) {
    const auto& all = data.split(config.train_split);
    const std::vector<env::Episode> head(all.begin(),
                                         all.begin() + static_cast<std::ptrdiff_t>(std::min(all.size(), config.train_eval_episodes)));
    record_eval(result, sink, epoch, config.train_split,
                eval::evaluate(data, infer(agent, data, head, io), config.success_threshold).summary);
  }
  for (const auto& name : config.eval_splits) {
    const auto m = eval::evaluate(data, infer(agent, data, data.split(name), io), config.success_threshold).summary;
    record_eval(result, sink, epoch, name, m);
    if (name == config.select_split) select = m.sr;
  }
  return select;
}

}  // namespace

TrainResult train(agent::Agent& agent, const env::Dataset& data, const TrainConfig& config, const CurveSink& sink) {
  if (config.loss.lambda < 0.0 || config.loss.lambda > 1.0) throw std::invalid_argument("train: lambda must be in [0, 1]");
  if (config.loss.beta < 0.0) throw std::invalid_argument("train: beta must be non-negative");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch size must be positive");

  TrainResult result;
  const auto& episodes = data.split(config.train_split);
  Adam adam(agent.params(), config.adam);

  result.best_sr = evaluate_epoch(agent, data, config, 0, result, sink);
  ad::ParameterSet best = agent.params();
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(episodes.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t n = std::min(order.size() - begin, static_cast<std::size_t>(config.batch_size));
      std::vector<EpisodeGrad> parts(n);
      parallel_for(n, config.workers, [&](std::size_t i) {
        const std::size_t index = order[begin + i];
        const env::Episode& ep = episodes[index];
        ad::Tape tape;
        const agent::Bound b = agent.bind(tape, true);
        Rng rng = make_rng(config.seed, "rollout", static_cast<std::uint64_t>(epoch) * 1000003ULL + index);
        RolloutOptions ro;
        ro.mode = agent::ActionMode::kSample;
        ro.training = true;
        ro.moments = &parts[i].moments;
        const Rollout r = rollout(agent, b, data.graph_of(ep), ep, ro, rng);
        const ad::Var loss = rollout_loss(r, config.loss);
        parts[i].loss = loss.item();
        parts[i].grads = ad::GradientSet(agent.params());
        if (!std::isfinite(parts[i].loss)) return;
        tape.backward(loss);
        tape.collect_parameter_grads(parts[i].grads);
      });

      ad::GradientSet total(agent.params());
      agent::NormAccumulator moments;
      for (const auto& p : parts) {
        if (!std::isfinite(p.loss)) result.non_finite_loss = true;
        epoch_loss += p.loss;
        total += p.grads;
        moments.merge(p.moments);
      }
      if (result.non_finite_loss) break;
      total.scale(1.0 / static_cast<double>(n));
      if (!adam.step(agent.params(), total)) ++result.skipped_updates;
      agent.update_norm_stats(moments);
      ++result.updates;
    }
    result.epochs_run = epoch;
    emit(result, sink, {epoch, config.train_split, "loss", epoch_loss / static_cast<double>(std::max<std::size_t>(1, episodes.size()))});
    if (result.non_finite_loss) break;

    const double sr = evaluate_epoch(agent, data, config, epoch, result, sink);
    if (sr > result.best_sr) {
      result.best_sr = sr;
      result.best_epoch = epoch;
      best = agent.params();
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  agent.params() = best;
  return result;
}

}  // namespace rnav::train
