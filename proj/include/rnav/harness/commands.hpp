#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rnav/harness/spec.hpp"

namespace rnav::harness {

// Writes the dataset of the spec. Refuses to touch an existing dataset.
env::Dataset gen_env(const ExperimentSpec& spec, std::ostream& log);

// Loads the spec's dataset and checks it was generated from the spec's env config.
env::Dataset load_experiment_dataset(const ExperimentSpec& spec);

struct TrainOutcome {
  train::TrainResult result;
  std::filesystem::path checkpoint;
};

// Trains run `spec.run`; writes spec.json, curves.jsonl, train.json and the
// checkpoint. Refuses to overwrite a checkpoint; throws NumericalError on a
// non-finite loss (no checkpoint is written then).
TrainOutcome train_run(const ExperimentSpec& spec, std::ostream& log);
TrainOutcome train_run(const ExperimentSpec& spec, const env::Dataset& data, std::ostream& log);

struct SplitEvaluation {
  std::string split;
  std::vector<eval::TrajectoryResult> results;
  eval::Evaluation evaluation;
};

struct EvalReport {
  std::vector<SplitEvaluation> splits;
  std::filesystem::path dir;

  const SplitEvaluation& at(const std::string& split) const;
};

// Greedy inference on every spec.eval_splits entry. Writes report.jsonl (one
// record per episode plus one summary per split), report.txt, and with
// dump_trajectories one trajectories-<split>.jsonl per split.
EvalReport eval_run(const ExperimentSpec& spec, std::optional<std::filesystem::path> checkpoint, std::ostream& log);
EvalReport eval_run(const ExperimentSpec& spec, const env::Dataset& data,
                    std::optional<std::filesystem::path> checkpoint, std::ostream& log);

struct Variant {
  std::string name;
  bool regret = true;
  bool marker = true;
  std::string train_split = "train";
  std::string model;  // non-empty: reuse that variant's model instead of training
  bool block_rollback = false;
};

// baseline, regret-only, marker-only, full, full with rollback blocked at
// inference, and baseline/full trained on noisy instructions.
std::vector<Variant> default_variants();

struct AblationRow {
  Variant variant;
  std::string split;
  eval::MetricSummary metrics;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<EvalReport> reports;  // aligned with the evaluated variants

  const AblationRow& row(const std::string& variant, const std::string& split) const;
};

// Trains and evaluates each variant on the spec's dataset, then writes
// ablate/ablation.jsonl and ablate/ablation.txt. `only` restricts the variants
// by name; variants a kept one depends on are trained as well.
AblationResult ablate(const ExperimentSpec& spec, const std::vector<std::string>& only, std::ostream& log);

}  // namespace rnav::harness
