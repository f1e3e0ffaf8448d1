#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rnav/harness/commands.hpp"
#include "rnav/harness/report.hpp"

using namespace rnav;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

harness::ExperimentSpec tiny_spec(const std::string& dir) {
  harness::ExperimentSpec s;
  s.seed = 5;
  s.output_dir = (fs::temp_directory_path() / "rnav-test-harness" / dir).string();
  s.env.train_graphs = 3;
  s.env.unseen_graphs = 2;
  s.env.train_episodes_per_graph = 4;
  s.env.seen_episodes_per_graph = 2;
  s.env.unseen_episodes_per_graph = 3;
  s.agent.hidden = 8;
  s.agent.embed = 8;
  s.agent.proj = 8;
  s.train.epochs = 1;
  s.train.batch_size = 4;
  s.train.train_eval_episodes = 4;
  s.eval_splits = {"seen", "unseen"};
  fs::remove_all(s.output_dir);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> read_lines(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("spec round trip and defaults") {
  const harness::ExperimentSpec s;
  const harness::ExperimentSpec back = harness::spec_from_json(harness::to_json(s));
  CHECK(harness::to_json(back) == harness::to_json(s));
  CHECK(s.resolved_env().seed == harness::ExperimentSpec{}.resolved_env().seed);
  harness::ExperimentSpec other;
  other.seed = 2;
  CHECK(other.resolved_env().seed != s.resolved_env().seed);
  CHECK(s.init_seed() != s.resolved_train().seed);
  CHECK(s.train.adam.lr == 1e-2);
  CHECK(s.train.loss.lambda == 0.5);
  CHECK(s.train.loss.beta == 0.01);
}

TEST_CASE("spec presets and validation") {
  const auto full = harness::spec_from_json(json{{"preset", "full"}});
  CHECK(full.env.features.feature_dim() == 2176);
  CHECK(full.agent.hidden == 512);
  CHECK(full.agent.feature_dim() == 2176);

  CHECK_THROWS_AS(harness::spec_from_json(json{{"sed", 1}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"train", {{"lambda", 1.5}}}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"train", {{"beta", -0.1}}}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"train", {{"epoch", 3}}}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"workers", 0}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"seed", "one"}}), harness::ConfigError);
  CHECK_THROWS_AS(harness::spec_from_json(json{{"env", {{"preset", "full"}}}}), harness::ConfigError);
}

TEST_CASE("output root comes from the environment") {
  harness::ExperimentSpec s;
  s.output_dir = "exp";
  setenv("RNAV_OUTPUT_ROOT", "/tmp/somewhere", 1);
  CHECK(harness::layout_of(s).root == fs::path("/tmp/somewhere/exp"));
  unsetenv("RNAV_OUTPUT_ROOT");
  CHECK(harness::layout_of(s).root == fs::current_path() / "exp");
  s.output_dir = "/abs/exp";
  CHECK(harness::layout_of(s).root == fs::path("/abs/exp"));
}

TEST_CASE("aligned table") {
  harness::Table t{{"name", "value"}, {{"a", "1.5"}, {"longer", "10.25"}}};
  CHECK(t.render() == "name    value\n-------------\na         1.5\nlonger  10.25\n");
}

TEST_CASE("gen-env writes the splits once and never overwrites") {
  const auto spec = tiny_spec("gen");
  std::ostringstream log;
  const env::Dataset data = harness::gen_env(spec, log);
  const auto dir = harness::layout_of(spec).dataset();
  for (const char* split : {"train", "seen", "unseen", "train_noisy", "seen_noisy", "unseen_noisy"}) {
    CHECK(fs::exists(dir / (std::string(split) + ".json")));
  }
  CHECK(data.split("train").size() == 12);
  CHECK(data.split("seen").size() == 6);
  CHECK(data.split("unseen").size() == 6);

  std::set<int> train_graphs, unseen_graphs;
  for (const auto& e : data.split("train")) train_graphs.insert(e.graph);
  for (const auto& e : data.split("seen")) CHECK(train_graphs.contains(e.graph));
  for (const auto& e : data.split("unseen")) unseen_graphs.insert(e.graph);
  for (const int g : unseen_graphs) CHECK_FALSE(train_graphs.contains(g));

  const std::string before = slurp(dir / "train.json");
  CHECK_THROWS_AS(harness::gen_env(spec, log), harness::ConfigError);
  CHECK(slurp(dir / "train.json") == before);

  auto again = tiny_spec("gen-again");
  harness::gen_env(again, log);
  for (const auto& f : fs::directory_iterator(dir)) {
    CHECK(slurp(f.path()) == slurp(harness::layout_of(again).dataset() / f.path().filename()));
  }
}

TEST_CASE("train and eval") {
  auto spec = tiny_spec("run");
  std::ostringstream log;
  CHECK_THROWS_AS(harness::train_run(spec, log), harness::ConfigError);  // no dataset yet
  harness::gen_env(spec, log);

  const auto outcome = harness::train_run(spec, log);
  const auto run = harness::layout_of(spec).run(spec.run);
  CHECK(fs::exists(outcome.checkpoint));
  CHECK(harness::spec_from_json(json::parse(slurp(run / "spec.json"))).seed == spec.seed);
  const auto curve = read_lines(run / "curves.jsonl");
  CHECK(curve.size() == outcome.result.curve.size());
  for (const auto& r : curve) {
    CHECK(r.contains("epoch"));
    CHECK(r.contains("split"));
    CHECK(r.contains("metric"));
    CHECK(r.contains("value"));
  }
  const std::string ckpt = slurp(outcome.checkpoint);
  CHECK_THROWS_AS(harness::train_run(spec, log), harness::ConfigError);
  CHECK(slurp(outcome.checkpoint) == ckpt);

  spec.dump_trajectories = true;
  const auto first = harness::eval_run(spec, std::nullopt, log);
  const std::string report = slurp(first.dir / "report.jsonl");
  harness::eval_run(spec, std::nullopt, log);
  CHECK(slurp(first.dir / "report.jsonl") == report);

  // Summary records carry every metric; SR agrees with the trajectory dump.
  for (const auto& rec : read_lines(first.dir / "report.jsonl")) {
    if (rec["record"] != "summary") continue;
    for (const char* k : {"ne", "sr", "osr", "spl", "one", "failures_with_rollback", "rollbacks_per_step"}) {
      CHECK(rec.contains(k));
    }
    const auto dump = read_lines(first.dir / ("trajectories-" + rec["split"].get<std::string>() + ".jsonl"));
    double successes = 0.0;
    for (const auto& t : dump) successes += t["ne"].get<double>() < spec.train.success_threshold ? 1.0 : 0.0;
    CHECK(rec["sr"].get<double>() == successes / static_cast<double>(dump.size()));
  }

  spec.block_rollback = true;
  const auto blocked = harness::eval_run(spec, std::nullopt, log);
  CHECK(blocked.dir.filename() == "eval-blocked");
  const env::Dataset data = harness::load_experiment_dataset(spec);
  for (const auto& se : blocked.splits) {
    for (const auto& r : se.results) {
      for (std::size_t k = 2; k < r.visited.size(); ++k) {
        if (r.visited[k] == r.visited[k - 2]) {
          CHECK(data.graphs.at(static_cast<std::size_t>(r.graph)).directions(r.visited[k - 1]).size() == 1);
        }
      }
    }
  }

  CHECK_THROWS_AS(harness::eval_run(spec, fs::path("/nonexistent/ckpt"), log), harness::ConfigError);
}

TEST_CASE("a dataset from another seed is rejected") {
  auto spec = tiny_spec("mismatch");
  std::ostringstream log;
  harness::gen_env(spec, log);
  spec.seed = 6;
  CHECK_THROWS_AS(harness::load_experiment_dataset(spec), harness::ConfigError);
}

TEST_CASE("ablation variants carry their flags") {
  auto spec = tiny_spec("ablate");
  std::ostringstream log;
  harness::gen_env(spec, log);
  const auto result = harness::ablate(spec, {"baseline", "marker-only", "full-blocked"}, log);
  const auto& base = result.row("baseline", "unseen").variant;
  CHECK_FALSE(base.regret);
  CHECK_FALSE(base.marker);
  CHECK(result.row("marker-only", "unseen").variant.marker);
  CHECK_FALSE(result.row("marker-only", "unseen").variant.regret);
  CHECK(result.row("full-blocked", "unseen").variant.block_rollback);
  CHECK(result.row("full", "seen").metrics.episodes == 6);  // trained as the blocked row's model

  const auto runs = harness::layout_of(spec).root / "runs";
  const auto base_spec = harness::spec_from_json(json::parse(slurp(runs / "baseline" / "spec.json")));
  CHECK_FALSE(base_spec.agent.regret);
  CHECK_FALSE(base_spec.agent.marker);
  const auto lines = read_lines(harness::layout_of(spec).ablation() / "ablation.jsonl");
  CHECK(lines.size() == result.rows.size());
  CHECK(fs::exists(harness::layout_of(spec).ablation() / "ablation.txt"));
  CHECK_THROWS_AS(harness::ablate(spec, {"baseline"}, log), harness::ConfigError);
  CHECK_THROWS_AS(harness::ablate(tiny_spec("unknown"), {"nope"}, log), harness::ConfigError);
}
