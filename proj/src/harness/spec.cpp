#include "rnav/harness/spec.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "rnav/core/rng.hpp"

namespace rnav::harness {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key in " + where + ": " + key);
  }
}

json train_to_json(const train::TrainConfig& t) {
  return {{"lambda", t.loss.lambda},
          {"beta", t.loss.beta},
          {"lr", t.adam.lr},
          {"clip_norm", t.adam.clip_norm},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"patience", t.patience},
          {"success_threshold", t.success_threshold},
          {"train_split", t.train_split},
          {"eval_splits", t.eval_splits},
          {"select_split", t.select_split},
          {"train_eval_episodes", t.train_eval_episodes}};
}

train::TrainConfig train_from_json(const json& j) {
  check_keys(j,
             {"lambda", "beta", "lr", "clip_norm", "epochs", "batch_size", "patience", "success_threshold",
              "train_split", "eval_splits", "select_split", "train_eval_episodes"},
             "train");
  train::TrainConfig t;
  const auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lambda", t.loss.lambda);
  get("beta", t.loss.beta);
  get("lr", t.adam.lr);
  get("clip_norm", t.adam.clip_norm);
  get("epochs", t.epochs);
  get("batch_size", t.batch_size);
  get("patience", t.patience);
  get("success_threshold", t.success_threshold);
  get("train_split", t.train_split);
  get("eval_splits", t.eval_splits);
  get("select_split", t.select_split);
  get("train_eval_episodes", t.train_eval_episodes);
  if (t.loss.lambda < 0.0 || t.loss.lambda > 1.0) throw ConfigError("train.lambda must be in [0, 1]");
  if (t.loss.beta < 0.0) throw ConfigError("train.beta must be non-negative");
  if (!(t.adam.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (t.epochs < 0) throw ConfigError("train.epochs must be non-negative");
  if (t.batch_size < 1) throw ConfigError("train.batch_size must be positive");
  if (!(t.success_threshold > 0.0)) throw ConfigError("train.success_threshold must be positive");
  return t;
}

}  // namespace

env::EnvConfig ExperimentSpec::resolved_env() const {
  env::EnvConfig e = env;
  e.seed = derive_seed(seed, "env");
  return e;
}

train::TrainConfig ExperimentSpec::resolved_train() const {
  train::TrainConfig t = train;
  t.seed = derive_seed(seed, "train");
  t.workers = workers;
  return t;
}

std::uint64_t ExperimentSpec::init_seed() const { return derive_seed(seed, "init"); }
std::uint64_t ExperimentSpec::inference_seed() const { return derive_seed(seed, "inference"); }

json to_json(const ExperimentSpec& s) {
  json e = env::to_json(s.env);
  e.erase("seed");
  return {{"seed", s.seed},
          {"output_dir", s.output_dir},
          {"run", s.run},
          {"workers", s.workers},
          {"block_rollback", s.block_rollback},
          {"dump_trajectories", s.dump_trajectories},
          {"eval_splits", s.eval_splits},
          {"env", std::move(e)},
          {"agent", agent::to_json(s.agent)},
          {"train", train_to_json(s.train)}};
}

ExperimentSpec spec_from_json(const json& j) {
  check_keys(j,
             {"seed", "preset", "output_dir", "run", "workers", "block_rollback", "dump_trajectories", "eval_splits",
              "env", "agent", "train"},
             "spec");
  ExperimentSpec s;
  try {
    const auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("seed", s.seed);
    get("output_dir", s.output_dir);
    get("run", s.run);
    get("workers", s.workers);
    get("block_rollback", s.block_rollback);
    get("dump_trajectories", s.dump_trajectories);
    get("eval_splits", s.eval_splits);

    // A top-level preset applies to both sections unless they name their own.
    json env_j = j.value("env", json::object());
    json agent_j = j.value("agent", json::object());
    if (j.contains("preset")) {
      if (!env_j.contains("preset")) env_j["preset"] = j.at("preset");
      if (!agent_j.contains("preset")) agent_j["preset"] = j.at("preset");
    }
    s.env = env::env_config_from_json(env_j);
    s.agent = agent::agent_config_from_json(agent_j);
    if (j.contains("train")) s.train = train_from_json(j.at("train"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid spec: ") + e.what());
  }
  if (s.workers < 1) throw ConfigError("workers must be positive");
  if (s.run.empty() || s.run.find('/') != std::string::npos) throw ConfigError("run must be a plain name");
  if (s.agent.features.appearance_dim != s.env.features.appearance_dim ||
      s.agent.features.orient_tile != s.env.features.orient_tile) {
    throw ConfigError("agent and env feature layouts differ");
  }
  return s;
}

json load_spec_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read spec " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse spec " + path.string() + ": " + e.what());
  }
}

ExperimentSpec load_spec(const std::filesystem::path& path) { return spec_from_json(load_spec_json(path)); }

std::filesystem::path output_root() {
  if (const char* root = std::getenv("RNAV_OUTPUT_ROOT"); root != nullptr && *root != '\0') return root;
  return std::filesystem::current_path();
}

Layout layout_of(const ExperimentSpec& s) {
  const std::filesystem::path dir(s.output_dir);
  return {dir.is_absolute() ? dir : output_root() / dir};
}

}  // namespace rnav::harness
