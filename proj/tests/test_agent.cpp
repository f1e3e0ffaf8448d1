#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "rnav/agent/checkpoint.hpp"
#include "rnav/ad/grad_check.hpp"
#include "rnav/env/oracle.hpp"
#include "rnav/train/rollout.hpp"

using namespace rnav;
using namespace rnav::agent;
using ad::Shape;
using ad::Tape;

namespace {

AgentConfig toy_config() {
  AgentConfig c;
  c.embed = 6;
  c.hidden = 8;
  c.proj = 10;
  c.features = {8, 2};
  c.max_instruction = 40;
  c.marker_tile = 3;
  return c;
}

env::GraphParams toy_graph_params() {
  env::GraphParams p;
  p.appearance_dim = 8;
  return p;
}

void randomize(ad::ParameterSet& params, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& p : params) {
    if (!p.trainable) continue;
    for (double& v : p.value.values()) v = u(rng);
  }
}

void zero(ad::ParameterSet& params, const std::string& name) { params[params.index_of(name)].value.fill(0.0); }

ad::Tensor random_tensor(Shape s, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ad::Tensor t(s);
  for (double& v : t.values()) v = u(rng);
  return t;
}

ad::Var weighted_sum(ad::Var v, std::uint64_t seed) {
  Rng rng(seed);
  return ad::dot(v, v.tape()->constant(random_tensor(v.shape(), rng)));
}

struct World {
  env::NavGraph graph;
  env::Episode episode;
};

World toy_world(std::uint64_t seed) {
  World w{env::generate_graph(seed, toy_graph_params()), {}};
  w.episode = env::make_episode(w.graph, 0, seed, 0.0);
  return w;
}

}  // namespace

TEST_CASE("encoder emits one context vector per token") {
  Agent a(toy_config(), 1);
  Tape t;
  const Bound b = a.bind(t, false);
  const std::vector<int> tokens{2, 3, 19, 6, 7, 20};
  const Encoded e = a.encode_instruction(b, tokens, nullptr, false);
  CHECK(e.context.shape() == Shape{6, 8});
  CHECK_THROWS_AS(a.encode_instruction(b, std::vector<int>{}, nullptr, false), std::invalid_argument);
  CHECK_THROWS_AS(a.encode_instruction(b, std::vector<int>{64}, nullptr, false), std::out_of_range);
}

TEST_CASE("encoder with zero LSTM parameters yields zero context") {
  Agent a(toy_config(), 1);
  zero(a.params(), "encoder.weight");
  zero(a.params(), "encoder.bias");
  Tape t;
  const Bound b = a.bind(t, false);
  const Encoded e = a.encode_instruction(b, std::vector<int>{2, 3, 19}, nullptr, false);
  for (double v : e.context.value().values()) CHECK(v == 0.0);
}

TEST_CASE("encoder gradient wrt the embedding table") {
  Agent a(toy_config(), 2);
  const std::vector<int> tokens{2, 3, 19, 5, 12, 2, 3, 25};
  const auto loss = [&](Tape& t, const ad::ParameterSet&) {
    const Bound b = a.bind(t, true);
    const Encoded e = a.encode_instruction(b, tokens, nullptr, false);
    return ad::scale(ad::sum(e.context), 1.0 / static_cast<double>(e.context.value().size()));
  };
  ad::ParameterSet& p = a.params();
  for (auto& q : p) q.trainable = q.name == "embedding";
  const auto r = ad::grad_check(p, loss);
  INFO(r.summary());
  CHECK(r.passed());
}

TEST_CASE("co-grounding special cases") {
  Agent a(toy_config(), 3);
  Tape t;
  const Bound b = a.bind(t, false);
  Rng rng(5);
  const ad::Var h = t.constant(random_tensor({1, 8}, rng));
  const ad::Var g = t.constant(random_tensor({3, 10}, rng));

  const ad::Var one = t.constant(random_tensor({1, 8}, rng));
  const Grounding single = co_ground(b, h, one, g, {});
  CHECK(single.alpha.value()[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 8; ++i) CHECK(single.x_hat.value()[i] == doctest::Approx(one.value()[i]).epsilon(1e-15));

  ad::Tensor same({4, 8});
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 8; ++c) same(r, c) = one.value()[c];
  }
  const Grounding uniform = co_ground(b, h, t.constant(same), g, {});
  for (double v : uniform.alpha.value().values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  const Grounding masked = co_ground(b, h, t.constant(same), g, {1, 0, 1});
  CHECK(masked.beta.value()[1] == 0.0);
  CHECK_THROWS_AS(co_ground(b, h, t.constant(same), g, {0, 0, 0}), ad::ShapeError);
}

TEST_CASE("co-grounding attention sums to one and W_x receives gradient") {
  Agent a(toy_config(), 4);
  Rng rng(9);
  const ad::Tensor h = random_tensor({1, 8}, rng), x = random_tensor({5, 8}, rng), g = random_tensor({4, 10}, rng);
  for (auto& q : a.params()) q.trainable = q.name == "W_x" || q.name == "W_v";
  const auto loss = [&](Tape& t, const ad::ParameterSet&) {
    const Bound b = a.bind(t, true);
    const Grounding gr = co_ground(b, t.constant(h), t.constant(x), t.constant(g), {});
    double total = 0.0;
    for (double v : gr.alpha.value().values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const ad::Var parts[] = {gr.x_hat, gr.v_hat};
    return weighted_sum(ad::concat_cols(parts), 3);
  };
  const auto r = ad::grad_check(a.params(), loss);
  INFO(r.summary());
  CHECK(r.passed());
}

TEST_CASE("decoder step") {
  Agent zero_agent(toy_config(), 5);
  zero(zero_agent.params(), "decoder.weight");
  zero(zero_agent.params(), "decoder.bias");
  Tape t;
  const Bound b = zero_agent.bind(t, false);
  Rng rng(2);
  const ad::Tensor c_prev = random_tensor({1, 8}, rng);
  const ad::LstmState s = decode_step(b, t.constant(random_tensor({1, 8}, rng)), t.constant(random_tensor({1, 10}, rng)),
                                      t.constant(random_tensor({1, 10}, rng)), t.constant(random_tensor({1, 8}, rng)),
                                      t.constant(c_prev));
  for (std::size_t i = 0; i < 8; ++i) {
    // All gates sit at sigmoid(0) = 0.5 and the candidate at tanh(0) = 0.
    CHECK(s.c.value()[i] == doctest::Approx(0.5 * c_prev[i]).epsilon(1e-15));
    CHECK(s.h.value()[i] == doctest::Approx(0.5 * std::tanh(0.5 * c_prev[i])).epsilon(1e-15));
  }

  Agent full(AgentConfig::full(), 1);
  const auto& w = full.params()[full.params().index_of("decoder.weight")].value;
  CHECK(w.shape() == Shape{512 + 1024 + 1024 + 512, 4 * 512});
  Tape ft;
  const Bound fb = full.bind(ft, false);
  const ad::LstmState fs = decode_step(fb, ft.constant(ad::Tensor({1, 512})), ft.constant(ad::Tensor({1, 1024})),
                                       ft.constant(ad::Tensor({1, 1024})), ft.constant(ad::Tensor({1, 512})),
                                       ft.constant(ad::Tensor({1, 512})));
  CHECK(fs.h.shape() == Shape{1, 512});
  CHECK(fs.c.shape() == Shape{1, 512});
}

TEST_CASE("decoder gradients reach all three concatenated inputs") {
  Agent a(toy_config(), 6);
  Rng rng(4);
  ad::ParameterSet inputs;
  inputs.add("x_hat", random_tensor({1, 8}, rng));
  inputs.add("v_hat", random_tensor({1, 10}, rng));
  inputs.add("a_prev", random_tensor({1, 10}, rng));
  inputs.add("h_prev", random_tensor({1, 8}, rng));
  inputs.add("c_prev", random_tensor({1, 8}, rng));
  const auto loss = [&](Tape& t, const ad::ParameterSet& p) {
    const Bound b = a.bind(t, false);
    const ad::LstmState s = decode_step(b, t.parameter(p, 0), t.parameter(p, 1), t.parameter(p, 2), t.parameter(p, 3),
                                        t.parameter(p, 4));
    const ad::Var both[] = {s.h, s.c};
    return weighted_sum(ad::concat_cols(both), 8);
  };
  const auto r = ad::grad_check(inputs, loss);
  INFO(r.summary());
  CHECK(r.passed());
}

TEST_CASE("progress monitor") {
  Agent a(toy_config(), 7);
  Rng rng(8);
  const ad::Tensor h = random_tensor({1, 8}, rng), v = random_tensor({1, 10}, rng), c = random_tensor({1, 8}, rng);
  ad::Tensor alpha({1, 5}, 0.2);
  {
    Agent z(toy_config(), 7);
    zero(z.params(), "W_pm");
    Tape t;
    const Bound b = z.bind(t, false);
    CHECK(progress_monitor(b, t.constant(h), t.constant(v), t.constant(c), t.constant(alpha), 40).item() == 0.0);
  }
  randomize(a.params(), 3, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    const Bound b = a.bind(t, false);
    const double p = progress_monitor(b, t.constant(random_tensor({1, 8}, rng)), t.constant(random_tensor({1, 10}, rng)),
                                      t.constant(random_tensor({1, 8}, rng)), t.constant(alpha), 40)
                         .item();
    CHECK(p > -1.0);
    CHECK(p < 1.0);
  }
  Agent g(toy_config(), 7);
  for (auto& q : g.params()) q.trainable = q.name == "W_h" || q.name == "b_h" || q.name == "W_pm" || q.name == "b_pm";
  const auto loss = [&](Tape& t, const ad::ParameterSet&) {
    const Bound b = g.bind(t, true);
    return progress_monitor(b, t.constant(h), t.constant(v), t.constant(c), t.constant(alpha), 40);
  };
  const auto r = ad::grad_check(g.params(), loss);
  INFO(r.summary());
  CHECK(r.passed());
}

TEST_CASE("regret module") {
  Agent a(toy_config(), 8);
  Rng rng(3);
  const ad::Tensor h = random_tensor({1, 8}, rng), x = random_tensor({1, 8}, rng);
  {
    Tape t;
    const Bound b = a.bind(t, false);
    const RegretOutput zero_w = regret_module(b, t.constant(h), t.constant(x), t.constant(random_tensor({1, 10}, rng)), 0.7);
    CHECK(zero_w.alpha.value()[0] == 0.5);
    CHECK(zero_w.alpha.value()[1] == 0.5);
    const RegretOutput first = regret_module(b, t.constant(h), t.constant(x), ad::Var{}, 0.7);
    CHECK(first.alpha.value()[0] == 1.0);
    CHECK(first.alpha.value()[1] == 0.0);
  }
  randomize(a.params(), 4);
  {
    Tape t;
    const Bound b = a.bind(t, false);
    const ad::Var fwd_in[] = {t.constant(h), t.constant(x)};
    const ad::Var m_f = ad::matmul(ad::concat_cols(fwd_in), b.w_a);
    for (double dp : {-0.8, 0.0, 0.3}) {
      const RegretOutput same = regret_module(b, t.constant(h), t.constant(x), t.constant(m_f.value()), dp);
      CHECK(same.alpha.value()[0] + same.alpha.value()[1] == doctest::Approx(1.0).epsilon(1e-15));
      for (std::size_t i = 0; i < 10; ++i) CHECK(same.m_fr.value()[i] == doctest::Approx(m_f.value()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("marker memory") {
  std::map<ViewpointId, double> m;
  marker_update(m, 4, 0.2);
  CHECK(m.at(4) == 0.2);
  marker_update(m, 4, 0.36);
  CHECK(m.at(4) == 0.36);
  CHECK(m.size() == 1);

  env::PanoramaObservation obs;
  obs.viewpoint = 1;
  obs.targets = {-1, 4, 7};
  CHECK(marker_lookup(m, obs, 0) == 0.0);
  CHECK(marker_lookup(m, obs, 1) == 0.36);
  CHECK(marker_lookup(m, obs, 2) == 1.0);
}

TEST_CASE("marker differences reproduce the walkthrough values") {
  // Current progress 0.29; the start was marked 0.21 and the last viewpoint 0.31.
  const double p = 0.29;
  std::map<ViewpointId, double> m{{0, 0.21}, {1, 0.31}};
  env::PanoramaObservation obs;
  obs.targets = {-1, 0, 1, 2};
  CHECK(p - marker_lookup(m, obs, 1) == doctest::Approx(0.08));
  CHECK(p - marker_lookup(m, obs, 2) == doctest::Approx(-0.02));
  CHECK(p - marker_lookup(m, obs, 3) == doctest::Approx(-0.71));
}

TEST_CASE("scoring width with the marker enabled") {
  Agent full(AgentConfig::full(), 1);
  CHECK(full.params()[full.params().index_of("W_fr")].value.shape() == Shape{1024, 1056});
  AgentConfig base = AgentConfig::full();
  base.regret = base.marker = false;
  Agent b(base, 1);
  CHECK(!b.params().find("W_fr"));
}

TEST_CASE("identical candidates get equal probability") {
  Agent a(toy_config(), 9);
  randomize(a.params(), 10);
  std::vector<double> f(8 + 8, 0.3);
  env::PanoramaObservation obs;
  obs.viewpoint = 0;
  obs.targets = {-1, 1, 2};
  obs.features = {std::vector<double>(16, 0.0), f, f};
  obs.valid = {1, 1, 1};
  Tape t;
  const Bound b = a.bind(t, false);
  const Encoded e = a.encode_instruction(b, std::vector<int>{2, 3, 19}, nullptr, false);
  AgentState s = a.initial_state(b, e, 0);
  Rng rng(1);
  const StepDecision d = a.step(b, s, obs, e, {}, rng);
  CHECK(d.probs.value()[1] == doctest::Approx(d.probs.value()[2]).epsilon(1e-15));
  // Both candidates are unvisited, so their marker differences match too.
  CHECK(d.detached.marker_delta[1] == d.detached.marker_delta[2]);
  CHECK(d.detached.marker_delta[1] == doctest::Approx(d.progress.item() - 1.0));
  CHECK(d.detached.marker_delta[0] == doctest::Approx(d.progress.item()));
}

TEST_CASE("greedy rollouts are deterministic and stay on the graph") {
  Agent a(toy_config(), 11);
  randomize(a.params(), 12);
  const World w = toy_world(21);
  const auto run = [&](Tape& t) {
    const Bound b = a.bind(t, false);
    Rng rng(3);
    return train::rollout(a, b, w.graph, w.episode, {}, rng);
  };
  Tape t1, t2;
  const auto r1 = run(t1);
  const auto r2 = run(t2);
  CHECK(r1.trajectory.visited == r2.trajectory.visited);
  CHECK(r1.steps.size() == r2.steps.size());
  CHECK(static_cast<int>(r1.steps.size()) == r1.trajectory.steps);
  CHECK(r1.steps.size() <= 20);
  for (std::size_t i = 0; i < r1.steps.size(); ++i) {
    CHECK(std::ranges::equal(r1.steps[i].probs.value().values(), r2.steps[i].probs.value().values()));
    double total = 0.0;
    for (std::size_t k = 0; k < r1.steps[i].mask.size(); ++k) {
      if (!r1.steps[i].mask[k]) CHECK(r1.steps[i].probs.value()[k] == 0.0);
      total += r1.steps[i].probs.value()[k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1.steps[i].alpha_fr[0] + r1.steps[i].alpha_fr[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r1.steps[i].progress.item() > -1.0);
    CHECK(r1.steps[i].progress.item() < 1.0);
  }
  CHECK(r1.steps[0].alpha_fr[0] == 1.0);
  for (std::size_t i = 0; i + 1 < r1.trajectory.visited.size(); ++i) {
    CHECK(w.graph.edge_length(r1.trajectory.visited[i], r1.trajectory.visited[i + 1]).has_value());
  }
}

TEST_CASE("forced ground-truth actions reach the goal and stop") {
  Agent a(toy_config(), 13);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const World w = toy_world(30 + s);
    Tape t;
    const Bound b = a.bind(t, false);
    Rng rng(1);
    train::RolloutOptions o;
    o.mode = ActionMode::kForced;
    const auto r = train::rollout(a, b, w.graph, w.episode, o, rng);
    CHECK(r.trajectory.final_viewpoint() == w.episode.goal);
    CHECK(r.trajectory.visited == w.episode.path);
    CHECK(r.steps.back().action == 0);
    CHECK(r.progress_targets.front() == 0.0);
  }
}

TEST_CASE("marker memory holds exactly the viewpoints where steps ran") {
  Agent a(toy_config(), 14);
  randomize(a.params(), 15);
  const World w = toy_world(41);
  Tape t;
  const Bound b = a.bind(t, false);
  const Encoded e = a.encode_instruction(b, w.episode.instruction, nullptr, false);
  AgentState s = a.initial_state(b, e, w.episode.start);
  Rng rng(7);
  std::set<ViewpointId> visited;
  std::map<ViewpointId, double> replay;
  StepOptions o;
  o.mode = ActionMode::kSample;
  for (int i = 0; i < 5 && !s.stopped; ++i) {
    visited.insert(s.viewpoint);
    const ViewpointId here = s.viewpoint;
    const auto d = a.step(b, s, env::observe(w.graph, here, a.config().features), e, o, rng);
    replay[here] = d.progress.item();
  }
  std::set<ViewpointId> keys;
  for (const auto& [v, p] : s.markers) {
    keys.insert(v);
    CHECK(p == replay.at(v));
    CHECK(p >= -1.0);
    CHECK(p <= 1.0);
  }
  CHECK(keys == visited);
}

TEST_CASE("oscillation mask after a rollback lasts one step") {
  Agent a(toy_config(), 16);
  randomize(a.params(), 17);
  // Line 0-1-2: force 0 -> 1 -> 0 (a rollback), then the move 0 -> 1 is blocked.
  std::vector<env::Vec3> pos{{0, 0, 0}, {2.5, 0, 0}, {5, 0, 0}, {0, 2.5, 0}};
  std::vector<double> app(8, 0.1);
  const auto dir = [&](int from, int to) {
    return env::Direction{to, env::distance_between(pos[from], pos[to]), env::heading_between(pos[from], pos[to]), 0.0,
                          app};
  };
  const env::NavGraph g(pos, {0, 1, 2, 3}, {{dir(0, 1), dir(0, 3)}, {dir(1, 0), dir(1, 2)}, {dir(2, 1)}, {dir(3, 0)}});
  Tape t;
  const Bound b = a.bind(t, false);
  const Encoded e = a.encode_instruction(b, std::vector<int>{2, 3, 20}, nullptr, false);
  AgentState s = a.initial_state(b, e, 0);
  Rng rng(1);
  const auto obs = [&](ViewpointId v) { return env::observe(g, v, a.config().features); };
  StepOptions forced;
  forced.mode = ActionMode::kForced;
  forced.forced_action = obs(0).slot_of(1);
  a.step(b, s, obs(0), e, forced, rng);
  forced.forced_action = obs(1).slot_of(0);
  const auto back = a.step(b, s, obs(1), e, forced, rng);
  CHECK(back.rollback);
  const auto blocked = a.step(b, s, obs(0), e, {.mode = ActionMode::kGreedy}, rng);
  CHECK(blocked.probs.value()[static_cast<std::size_t>(obs(0).slot_of(1))] == 0.0);
  CHECK(blocked.to != 1);
}

TEST_CASE("sampled action frequencies match the distribution") {
  ad::Tensor p = ad::Tensor::row({0.1, 0.0, 0.45, 0.25, 0.2});
  Rng rng(99);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(sample_index(p, rng))];
  CHECK(counts[1] == 0);
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(counts[k] / 10000.0 - p[k]) < 0.02);
  CHECK(argmax_index(ad::Tensor::row({0.3, 0.3, 0.4}), {1, 1, 0}) == 0);
}

TEST_CASE("checkpoint round trip and shape checks") {
  Agent a(toy_config(), 18);
  randomize(a.params(), 19);
  const auto dir = std::filesystem::temp_directory_path() / "rnav_test_agent";
  std::filesystem::create_directories(dir);
  save_checkpoint(a, dir / "a.ckpt");
  const Agent loaded = load_checkpoint(dir / "a.ckpt");
  REQUIRE(loaded.params().size() == a.params().size());
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    CHECK(loaded.params()[i].name == a.params()[i].name);
    CHECK(std::ranges::equal(loaded.params()[i].value.values(), a.params()[i].value.values()));
    CHECK(loaded.params()[i].trainable == a.params()[i].trainable);
  }
  AgentConfig wider = toy_config();
  wider.hidden = 9;
  Agent other(wider, 1);
  CHECK_THROWS_AS(load_parameters(other, dir / "a.ckpt"), CheckpointError);
  AgentConfig baseline = toy_config();
  baseline.regret = baseline.marker = false;
  Agent fewer(baseline, 1);
  CHECK_THROWS_AS(load_parameters(fewer, dir / "a.ckpt"), CheckpointError);
  {
    std::ofstream bad(dir / "bad.ckpt");
    bad << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("progress-monitor weights receive no gradient from the action loss alone") {
  Agent a(toy_config(), 20);
  randomize(a.params(), 21);
  const World w = toy_world(51);
  Tape t;
  const Bound b = a.bind(t, true);
  Rng rng(2);
  train::RolloutOptions o;
  o.mode = ActionMode::kSample;
  const auto r = train::rollout(a, b, w.graph, w.episode, o, rng);
  t.backward(train::rollout_loss(r, {.lambda = 1.0, .beta = 0.0}));
  ad::GradientSet g(a.params());
  t.collect_parameter_grads(g);
  for (const char* name : {"W_h", "b_h", "W_pm", "b_pm"}) {
    for (double v : g[a.params().index_of(name)].values()) CHECK(v == 0.0);
  }
  double w_a = 0.0;
  for (double v : g[a.params().index_of("W_a")].values()) w_a += std::abs(v);
  CHECK(w_a > 0.0);
}
