#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnav/agent/agent.hpp"
#include "rnav/env/dataset.hpp"
#include "rnav/train/trainer.hpp"

namespace rnav::harness {

// Invalid or inconsistent configuration, missing inputs, or refusal to overwrite.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
  std::uint64_t seed = 1;  // master seed: environment, initialization and rollout streams derive from it
  env::EnvConfig env;      // env.seed is ignored in favor of the derived stream
  agent::AgentConfig agent;
  train::TrainConfig train;  // train.seed and train.workers are likewise derived
  std::vector<std::string> eval_splits{"train", "seen", "unseen", "seen_noisy", "unseen_noisy"};
  bool block_rollback = false;
  bool dump_trajectories = false;
  std::string output_dir = "experiment";  // relative paths resolve under the output root
  std::string run = "main";
  int workers = 1;

  // Concrete configurations with the derived seeds applied.
  env::EnvConfig resolved_env() const;
  train::TrainConfig resolved_train() const;
  std::uint64_t init_seed() const;
  std::uint64_t inference_seed() const;
};

nlohmann::json to_json(const ExperimentSpec& s);
// Throws ConfigError on unknown keys, bad values, or env/agent feature mismatch.
ExperimentSpec spec_from_json(const nlohmann::json& j);
// Raw document, before defaults are applied.
nlohmann::json load_spec_json(const std::filesystem::path& path);
ExperimentSpec load_spec(const std::filesystem::path& path);

// $RNAV_OUTPUT_ROOT if set, else the working directory.
std::filesystem::path output_root();

struct Layout {
  std::filesystem::path root;  // experiment directory

  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path run(const std::string& name) const { return root / "runs" / name; }
  std::filesystem::path checkpoint(const std::string& name) const { return run(name) / "checkpoint.txt"; }
  std::filesystem::path ablation() const { return root / "ablate"; }
};

Layout layout_of(const ExperimentSpec& s);

}  // namespace rnav::harness
