#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rnav/agent/checkpoint.hpp"
#include "rnav/harness/commands.hpp"

using namespace rnav;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct Overrides {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<std::string> output_dir;
  std::optional<std::string> run;
  std::optional<int> workers;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<bool> regret;
  std::optional<bool> marker;
  std::optional<bool> block_rollback;
  std::optional<bool> dump_trajectories;
  std::vector<std::string> splits;
};

harness::ExperimentSpec resolve(const Overrides& o) {
  nlohmann::json j = o.spec_path.empty() ? nlohmann::json::object() : harness::load_spec_json(o.spec_path);
  if (o.preset) j["preset"] = *o.preset;
  harness::ExperimentSpec s = harness::spec_from_json(j);
  if (o.seed) s.seed = *o.seed;
  if (o.output_dir) s.output_dir = *o.output_dir;
  if (o.run) s.run = *o.run;
  if (o.workers) s.workers = *o.workers;
  if (o.epochs) s.train.epochs = *o.epochs;
  if (o.lr) s.train.adam.lr = *o.lr;
  if (o.regret) s.agent.regret = *o.regret;
  if (o.marker) s.agent.marker = *o.marker;
  if (o.block_rollback) s.block_rollback = *o.block_rollback;
  if (o.dump_trajectories) s.dump_trajectories = *o.dump_trajectories;
  if (!o.splits.empty()) s.eval_splits = o.splits;
  // Round-trip so flag values pass the same validation as file values.
  return harness::spec_from_json(harness::to_json(s));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigation agent with a learned progress heuristic: environment generation, training, evaluation "
               "and ablations.\nOutputs go under $RNAV_OUTPUT_ROOT (default: working directory) / output_dir."};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--spec", o.spec_path, "experiment spec (JSON); defaults apply when omitted")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--preset", o.preset, "feature and model scale")->check(CLI::IsMember({"desk", "full"}));
  app.add_option("--output-dir", o.output_dir, "experiment directory");
  app.add_option("--run", o.run, "run name for train/eval");
  app.add_option("--workers", o.workers, "rollout worker threads")->check(CLI::PositiveNumber);
  app.add_option("--epochs", o.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  app.add_option("--lr", o.lr, "learning rate")->check(CLI::PositiveNumber);
  app.add_option("--regret", o.regret, "regret module on/off (true/false)");
  app.add_option("--marker", o.marker, "progress marker on/off (true/false)");
  app.add_option("--block-rollback", o.block_rollback, "block rollback actions at inference (true/false)");
  app.add_option("--dump-trajectories", o.dump_trajectories, "write per-episode trajectories (true/false)");
  app.add_option("--splits", o.splits, "evaluation splits");

  auto* gen = app.add_subcommand("gen-env", "generate graphs and episodes");
  auto* trn = app.add_subcommand("train", "train one model");
  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint;
  evl->add_option("--checkpoint", checkpoint, "checkpoint path (default: the run's checkpoint)");
  auto* abl = app.add_subcommand("ablate", "train and evaluate the component variants");
  std::vector<std::string> variants;
  abl->add_option("--variants", variants, "subset of variants to run");
  auto* show = app.add_subcommand("show-spec", "print the resolved spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const harness::ExperimentSpec spec = resolve(o);
    if (show->parsed()) {
      std::cout << harness::to_json(spec).dump(2) << '\n';
    } else if (gen->parsed()) {
      harness::gen_env(spec, std::cout);
    } else if (trn->parsed()) {
      harness::train_run(spec, std::cout);
    } else if (evl->parsed()) {
      harness::eval_run(spec, checkpoint.empty() ? std::nullopt : std::optional<std::filesystem::path>(checkpoint),
                        std::cout);
    } else if (abl->parsed()) {
      harness::ablate(spec, variants, std::cout);
    }
  } catch (const harness::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const agent::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
