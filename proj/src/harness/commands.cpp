#include "rnav/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "rnav/agent/checkpoint.hpp"
#include "rnav/harness/report.hpp"

namespace rnav::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

env::Dataset gen_env(const ExperimentSpec& spec, std::ostream& log) {
  const Layout out = layout_of(spec);
  if (fs::exists(out.dataset())) throw ConfigError("dataset already exists: " + out.dataset().string());
  env::Dataset data;
  try {
    data = env::build_dataset(spec.resolved_env());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  env::save_dataset(data, out.dataset());
  write_json(out.root / "spec.json", to_json(spec));
  for (const auto& [name, episodes] : data.splits) log << "split " << name << ": " << episodes.size() << " episodes\n";
  log << "dataset written to " << out.dataset().string() << '\n';
  return data;
}

env::Dataset load_experiment_dataset(const ExperimentSpec& spec) {
  const fs::path dir = layout_of(spec).dataset();
  if (!fs::exists(dir / "config.json")) throw ConfigError("no dataset at " + dir.string() + "; run gen-env first");
  env::Dataset data = env::load_dataset(dir);
  if (env::to_json(data.config) != env::to_json(spec.resolved_env())) {
    throw ConfigError("dataset at " + dir.string() + " was generated from a different env config or seed");
  }
  return data;
}

TrainOutcome train_run(const ExperimentSpec& spec, std::ostream& log) {
  return train_run(spec, load_experiment_dataset(spec), log);
}

TrainOutcome train_run(const ExperimentSpec& spec, const env::Dataset& data, std::ostream& log) {
  const Layout out = layout_of(spec);
  const fs::path dir = out.run(spec.run);
  const fs::path ckpt = out.checkpoint(spec.run);
  if (fs::exists(ckpt)) throw ConfigError("checkpoint already exists: " + ckpt.string());
  const train::TrainConfig tc = spec.resolved_train();
  for (const auto& name : tc.eval_splits) {
    if (!data.splits.contains(name)) throw ConfigError("unknown split: " + name);
  }
  if (!data.splits.contains(tc.train_split)) throw ConfigError("unknown split: " + tc.train_split);

  write_json(dir / "spec.json", to_json(spec));
  agent::Agent model(spec.agent, spec.init_seed());
  std::vector<json> curve;
  TrainOutcome outcome;
  outcome.result = train::train(model, data, tc, [&](const train::CurveRecord& r) {
    curve.push_back({{"epoch", r.epoch}, {"split", r.split}, {"metric", r.metric}, {"value", r.value}});
    if (r.metric == "loss" || (r.split == tc.select_split && r.metric == "sr")) {
      log << "epoch " << r.epoch << ' ' << r.split << ' ' << r.metric << ' ' << r.value << '\n';
    }
  });
  write_lines(dir / "curves.jsonl", curve);
  const auto& res = outcome.result;
  write_json(dir / "train.json", {{"best_epoch", res.best_epoch},
                                  {"best_sr", res.best_sr},
                                  {"epochs_run", res.epochs_run},
                                  {"updates", res.updates},
                                  {"skipped_updates", res.skipped_updates},
                                  {"non_finite_loss", res.non_finite_loss}});
  if (res.non_finite_loss) throw NumericalError("non-finite loss in run " + spec.run);
  agent::save_checkpoint(model, ckpt);
  outcome.checkpoint = ckpt;
  log << "best epoch " << res.best_epoch << " (" << tc.select_split << " SR " << res.best_sr << "), checkpoint "
      << ckpt.string() << '\n';
  return outcome;
}

const SplitEvaluation& EvalReport::at(const std::string& split) const {
  for (const auto& s : splits) {
    if (s.split == split) return s;
  }
  throw std::out_of_range("split not in report: " + split);
}

EvalReport eval_run(const ExperimentSpec& spec, std::optional<fs::path> checkpoint, std::ostream& log) {
  return eval_run(spec, load_experiment_dataset(spec), std::move(checkpoint), log);
}

EvalReport eval_run(const ExperimentSpec& spec, const env::Dataset& data, std::optional<fs::path> checkpoint,
                    std::ostream& log) {
  const Layout out = layout_of(spec);
  const fs::path ckpt = checkpoint.value_or(out.checkpoint(spec.run));
  if (!fs::exists(ckpt)) throw ConfigError("no checkpoint at " + ckpt.string());
  const agent::Agent model = agent::load_checkpoint(ckpt);
  for (const auto& name : spec.eval_splits) {
    if (!data.splits.contains(name)) throw ConfigError("unknown split: " + name);
  }

  EvalReport report;
  report.dir = out.run(spec.run) / (spec.block_rollback ? "eval-blocked" : "eval");
  train::InferenceOptions io;
  io.block_rollback = spec.block_rollback;
  io.workers = spec.workers;
  io.seed = spec.inference_seed();
  std::vector<json> records;
  Table table{{"split"}, {}};
  for (const auto& h : metric_header()) table.header.push_back(h);
  for (const auto& name : spec.eval_splits) {
    SplitEvaluation se;
    se.split = name;
    se.results = train::infer(model, data, data.split(name), io);
    se.evaluation = eval::evaluate(data, se.results, spec.train.success_threshold);
    std::vector<json> dump;
    for (std::size_t i = 0; i < se.results.size(); ++i) {
      const auto& r = se.results[i];
      const auto& s = se.evaluation.scores[i];
      records.push_back({{"record", "episode"}, {"split", name},        {"episode", r.episode},
                         {"graph", r.graph},    {"ne", s.ne},           {"one", s.one},
                         {"success", s.success}, {"oracle_success", s.oracle_success}, {"spl", s.spl},
                         {"length", r.length},  {"steps", r.steps},     {"rollbacks", r.rollbacks}});
      if (spec.dump_trajectories) dump.push_back(eval::to_json(r, s));
    }
    json summary = eval::to_json(se.evaluation.summary);
    summary["record"] = "summary";
    summary["split"] = name;
    records.push_back(std::move(summary));
    if (spec.dump_trajectories) write_lines(report.dir / ("trajectories-" + name + ".jsonl"), dump);

    std::vector<std::string> row{name};
    for (auto& c : metric_cells(se.evaluation.summary)) row.push_back(std::move(c));
    table.rows.push_back(std::move(row));
    report.splits.push_back(std::move(se));
  }
  write_json(report.dir / "spec.json", to_json(spec));
  write_lines(report.dir / "report.jsonl", records);
  const std::string text = table.render();
  write_text(report.dir / "report.txt", text);
  log << text;
  return report;
}

std::vector<Variant> default_variants() {
  return {
      {"baseline", false, false, "train", "", false},
      {"regret-only", true, false, "train", "", false},
      {"marker-only", false, true, "train", "", false},
      {"full", true, true, "train", "", false},
      {"full-blocked", true, true, "train", "full", true},
      {"baseline-noisy-train", false, false, "train_noisy", "", false},
      {"full-noisy-train", true, true, "train_noisy", "", false},
  };
}

const AblationRow& AblationResult::row(const std::string& variant, const std::string& split) const {
  for (const auto& r : rows) {
    if (r.variant.name == variant && r.split == split) return r;
  }
  throw std::out_of_range("no ablation row for " + variant + " on " + split);
}

AblationResult ablate(const ExperimentSpec& spec, const std::vector<std::string>& only, std::ostream& log) {
  std::vector<Variant> all = default_variants();
  std::set<std::string> wanted;
  for (const auto& name : only) {
    const auto it = std::ranges::find(all, name, &Variant::name);
    if (it == all.end()) throw ConfigError("unknown variant: " + name);
    wanted.insert(name);
    if (!it->model.empty()) wanted.insert(it->model);
  }
  std::vector<Variant> variants;
  for (const auto& v : all) {
    if (wanted.empty() || wanted.contains(v.name)) variants.push_back(v);
  }

  const Layout out = layout_of(spec);
  if (fs::exists(out.ablation() / "ablation.jsonl")) {
    throw ConfigError("ablation already exists: " + out.ablation().string());
  }
  const env::Dataset data = load_experiment_dataset(spec);
  AblationResult result;
  std::vector<json> records;
  Table table{{"variant", "regret", "marker", "train", "blocked", "split"}, {}};
  for (const auto& h : metric_header()) table.header.push_back(h);

  for (const auto& v : variants) {
    ExperimentSpec vs = spec;
    vs.agent.regret = v.regret;
    vs.agent.marker = v.marker;
    vs.train.train_split = v.train_split;
    vs.block_rollback = v.block_rollback;
    vs.run = v.model.empty() ? v.name : v.model;
    log << "== " << v.name << " (regret " << on_off(v.regret) << ", marker " << on_off(v.marker) << ", train "
        << v.train_split << (v.block_rollback ? ", rollback blocked" : "") << ")\n";
    if (v.model.empty()) train_run(vs, data, log);
    EvalReport report = eval_run(vs, data, std::nullopt, log);
    for (const auto& se : report.splits) {
      const auto& m = se.evaluation.summary;
      result.rows.push_back({v, se.split, m});
      json rec = eval::to_json(m);
      rec["variant"] = v.name;
      rec["regret"] = v.regret;
      rec["marker"] = v.marker;
      rec["train_split"] = v.train_split;
      rec["block_rollback"] = v.block_rollback;
      rec["split"] = se.split;
      records.push_back(std::move(rec));
      std::vector<std::string> row{v.name, on_off(v.regret), on_off(v.marker), v.train_split,
                                   v.block_rollback ? "yes" : "no", se.split};
      for (auto& c : metric_cells(m)) row.push_back(std::move(c));
      table.rows.push_back(std::move(row));
    }
    result.reports.push_back(std::move(report));
  }
  write_json(out.ablation() / "spec.json", to_json(spec));
  write_lines(out.ablation() / "ablation.jsonl", records);
  const std::string text = table.render();
  write_text(out.ablation() / "ablation.txt", text);
  log << text;
  return result;
}

}  // namespace rnav::harness
