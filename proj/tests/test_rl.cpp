// Copyright 2026 The rabiq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rabiq/rl/artifacts.hpp"
#include "rabiq/rl/dqn.hpp"

namespace rabiq::rl {
namespace {

ControlConfig physics_config() {
  ControlConfig cfg;
  cfg.params.g = 0.3;
  cfg.omega_max = 0.3;
  return cfg;
}

TEST(Huber, Values) {
  for (double delta : {1.0, 0.5, 2.0}) {
    EXPECT_DOUBLE_EQ(huber_loss(0.0, delta), 0.0);
    EXPECT_DOUBLE_EQ(huber_loss(delta, delta), 0.5 * delta * delta);
    EXPECT_DOUBLE_EQ(huber_loss(2.0 * delta, delta), 1.5 * delta * delta);
    EXPECT_DOUBLE_EQ(huber_loss(-2.0 * delta, delta), 1.5 * delta * delta);
  }
}

TEST(AdamW, ZeroGradientWithoutDecayIsIdentity) {
  Eigen::VectorXd w(3);
  w << 1.0, -2.0, 0.5;
  const Eigen::VectorXd before = w;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  OptimizerState st(3, cfg);
  adamw_update(w, Eigen::VectorXd::Zero(3), st);
  EXPECT_EQ(w, before);
}

TEST(AdamW, ZeroGradientWithDecayScales) {
  Eigen::VectorXd w(3);
  w << 1.0, -2.0, 0.5;
  const Eigen::VectorXd before = w;
  OptimizerState st(3);
  adamw_update(w, Eigen::VectorXd::Zero(3), st);
  const double factor = 1.0 - 1e-3 * 1e-4;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w(i), before(i) * factor, 1e-15);
}

TEST(AdamW, TwoScalarStepsByHand) {
  Eigen::VectorXd w(1);
  w << 1.0;
  OptimizerState st(1);
  const Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
  // m1 = 0.1, v1 = 0.001 -> bias-corrected both 1; m2 = 0.19, v2 = 0.001999 -> again 1.
  const double eta = 1e-3;
  const double decay = 1.0 - eta * 1e-4;
  double expected = 1.0 * decay - eta * 1.0 / (1.0 + 1e-8);
  adamw_update(w, g, st);
  EXPECT_NEAR(w(0), expected, 1e-12);
  const double m2 = (0.9 * 0.1 + 0.1) / (1.0 - 0.81);
  const double v2 = (0.999 * 0.001 + 0.001) / (1.0 - 0.999 * 0.999);
  expected = expected * decay - eta * m2 / (std::sqrt(v2) + 1e-8);
  adamw_update(w, g, st);
  EXPECT_NEAR(w(0), expected, 1e-12);
  EXPECT_EQ(st.step, 2);
}

TEST(AdamW, NonFiniteGradientThrows) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
  OptimizerState st(2);
  Eigen::VectorXd g(2);
  g << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adamw_update(w, g, st), GradientOverflow);
  g << std::numeric_limits<double>::infinity(), 0.0;
  EXPECT_THROW(adamw_update(w, g, st), GradientOverflow);
}

Transition tagged(int tag) {
  Transition t;
  t.state.values[0] = tag;
  t.reward = -1.0;
  return t;
}

TEST(ReplayBuffer, RingOverwritesOldest) {
  ReplayBuffer buf(10000);
  for (int i = 0; i < 10001; ++i) {
    buf.push(tagged(i));
    ASSERT_LE(buf.size(), buf.capacity());
  }
  EXPECT_EQ(buf.size(), 10000u);
  bool first_present = false;
  bool last_present = false;
  for (const auto& t : buf.items()) {
    first_present |= t.state.values[0] == 0.0;
    last_present |= t.state.values[0] == 10000.0;
  }
  EXPECT_FALSE(first_present);
  EXPECT_TRUE(last_present);
}

TEST(ReplayBuffer, SamplingNeedsFullBatch) {
  ReplayBuffer buf(100);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 63; ++i) buf.push(tagged(i));
  EXPECT_THROW((void)buf.sample(64, rng), Error);
  buf.push(tagged(63));
  EXPECT_EQ(buf.sample(64, rng).size(), 64u);
}

TEST(SelectAction, UniformAtEpsilonOne) {
  std::mt19937_64 init(3);
  const QNetwork net(init);
  std::mt19937_64 rng(11);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(kObservationDim);
  std::array<int, 3> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[select_action(net, x, 1.0, rng)];
  const double p = 1.0 / 3.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_LT(std::abs(c - n * p), 3.0 * sigma);
}

TEST(SelectAction, GreedyIsRepeatable) {
  std::mt19937_64 init(5);
  const QNetwork net(init);
  Eigen::VectorXd x(kObservationDim);
  x << 0.1, 0.2, -0.3, 0.4, 0.5, -0.6;
  std::mt19937_64 rng(1);
  const int first = select_action(net, x, 0.0, rng);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(select_action(net, x, 0.0, rng), first);
  EXPECT_EQ(first, greedy_action(net.q_values(x)));
}

TEST(SelectAction, TieBreakLowestIndex) {
  EXPECT_EQ(greedy_action(Eigen::Vector3d(1, 3, 3)), 1);
  EXPECT_EQ(greedy_action(Eigen::Vector3d(2, 2, 2)), 0);
  std::mt19937_64 rng(1);
  const QNetwork net;
  EXPECT_THROW((void)select_action(net, Eigen::VectorXd::Zero(6), 1.5, rng), Error);
}

TEST(QNetwork, OutputsFiniteForFiniteInput) {
  std::mt19937_64 rng(9);
  const QNetwork net(rng);
  EXPECT_EQ(net.parameters().size(), 6 * 64 + 64 + 64 * 64 + 64 + 3 * 64 + 3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(kObservationDim, 20) * 50.0;
  EXPECT_TRUE(net.forward(x).allFinite());
}

TEST(QNetwork, GradientMatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    QNetwork net(rng);
    const int batch = 16;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(kObservationDim, batch);
    std::vector<int> actions(batch);
    Eigen::VectorXd targets(batch);
    // Redraw the batch until no ReLU or Huber kink lies within reach of the stencil.
    do {
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
      for (int i = 0; i < batch; ++i) {
        actions[i] = i % kActionCount;
        targets(i) = 3.0 * normal(rng);
      }
    } while (oracle::kink_margin(net, x, actions, targets) < 1e-3);
    Eigen::VectorXd grad;
    net.loss_and_gradient(x, actions, targets, grad);
    Eigen::VectorXd fd(grad.size());
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      const double w = net.parameters()(k);
      net.parameters()(k) = w + h;
      const double up = net.loss(x, actions, targets);
      net.parameters()(k) = w - h;
      const double down = net.loss(x, actions, targets);
      net.parameters()(k) = w;
      fd(k) = (up - down) / (2 * h);
    }
    EXPECT_LT((fd - grad).norm() / grad.norm(), 1e-4) << "seed " << seed;
  }
}

TEST(QNetwork, KinkMarginDetectsNearZeroPreactivation) {
  std::mt19937_64 rng(1005);
  const QNetwork net(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(kObservationDim, 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  // This draw puts one first-layer unit within 4e-8 of its kink.
  EXPECT_LT(oracle::kink_margin(net, x, std::vector<int>(16, 0), Eigen::VectorXd::Constant(16, 100.0)), 1e-7);
}

TEST(Reward, Examples) {
  EXPECT_EQ(entanglement_reward(0.02), 10.0);
  EXPECT_EQ(entanglement_reward(-0.01), -1.0);
  EXPECT_EQ(entanglement_reward(0.0), -1.0);
}

TEST(ControlEnvironment, CoherentReset) {
  ControlConfig cfg = physics_config();
  cfg.initial = InitialState::coherent_down;
  ControlEnvironment env(cfg);
  const ObservationVector obs = env.reset();
  EXPECT_NEAR(obs.photon_number(), 1.0, 1e-9);
  EXPECT_NEAR(obs.excitation(), 0.0, 1e-12);
}

TEST(ControlEnvironment, ResetIsBitwiseRepeatable) {
  ControlEnvironment env(physics_config());
  const ObservationVector first = env.reset();
  (void)env.step(2);
  (void)env.step(1);
  const ObservationVector second = env.reset();
  EXPECT_TRUE(first == second);
  EXPECT_EQ(env.time_step(), 0);
  EXPECT_EQ(env.episode_signal().size(), 1u);
}

TEST(ControlEnvironment, GroundStateIsEntangled) {
  ControlEnvironment env(physics_config());
  (void)env.reset();
  EXPECT_GT(env.episode_signal().front(), 0.0);
}

TEST(ControlEnvironment, EpisodeLifecycle) {
  ControlEnvironment env(physics_config());
  (void)env.reset();
  EXPECT_THROW((void)env.step(3), InvalidIndex);
  double ret = 0.0;
  for (int t = 0; t < kSegments; ++t) {
    const StepResult r = env.step(t % 3);
    EXPECT_TRUE(r.reward == 10.0 || r.reward == -1.0);
    EXPECT_EQ(r.done, t == kSegments - 1);
    ret += r.reward;
  }
  EXPECT_GE(ret, -30.0);
  EXPECT_LE(ret, 300.0);
  EXPECT_EQ(env.episode_signal().size(), static_cast<std::size_t>(kSegments + 1));
  EXPECT_THROW((void)env.step(0), EpisodeFinished);
}

TEST(InitialStateNames, ParseAndReject) {
  EXPECT_EQ(parse_initial_state("ground"), InitialState::hamiltonian_ground);
  EXPECT_EQ(parse_initial_state("coherent_down"), InitialState::coherent_down);
  EXPECT_THROW((void)parse_initial_state("vacuum"), ConfigError);
}

TEST(TrainRound, ToyEnvironmentLearnsOptimalPolicy) {
  int optimal = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ToyEnvironment env;
    DqnConfig cfg;
    cfg.seed = seed;
    const TrainingResult res = train_round(env, cfg);
    const std::vector<int> greedy = detail::greedy_rollout(res.network, env);
    bool all_two = greedy.size() == 3u;
    for (int a : greedy) all_two &= a == 2;
    optimal += all_two ? 1 : 0;
  }
  EXPECT_GE(optimal, 95);
}

TEST(TrainRound, ToyRewardsAndLogShape) {
  ToyEnvironment env;
  DqnConfig cfg;
  cfg.epochs = 20;
  cfg.greedy_eval_epochs = 3;
  const TrainingResult res = train_round(env, cfg);
  ASSERT_EQ(res.epochs.size(), 20u);
  for (const auto& rec : res.epochs) {
    EXPECT_EQ(rec.actions.size(), 3u);
    EXPECT_GE(rec.episode_return, -3.0);
    EXPECT_LE(rec.episode_return, 30.0);
    const bool evaluated = rec.epoch < 3 || rec.epoch >= 17;
    EXPECT_EQ(rec.greedy_actions.empty(), !evaluated);
  }
  EXPECT_DOUBLE_EQ(epsilon_at(cfg, 0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(cfg, 25), 0.525);
  EXPECT_DOUBLE_EQ(epsilon_at(cfg, 50), 0.05);
  EXPECT_DOUBLE_EQ(epsilon_at(cfg, 99), 0.05);
}

TEST(TrainRound, PhysicsRoundIsDeterministicAndReplayable) {
  const ControlConfig ccfg = physics_config();
  DqnConfig cfg;
  cfg.epochs = 4;
  cfg.greedy_eval_epochs = 0;
  cfg.seed = 42;
  ControlEnvironment env_a(ccfg);
  ControlEnvironment env_b(ccfg);
  const TrainingResult a = train_round(env_a, cfg);
  const TrainingResult b = train_round(env_b, cfg);
  ASSERT_TRUE(a.best_epoch.has_value());
  EXPECT_EQ(a.best().actions, b.best().actions);
  EXPECT_EQ(a.network.parameters(), b.network.parameters());

  const EpochRecord& best = a.best();
  const Trajectory replay = replay_best(to_pulse(ccfg.omega_max, best.actions), ccfg);
  ASSERT_EQ(replay.witness.size(), best.signal.size());
  for (std::size_t i = 0; i < best.signal.size(); ++i) EXPECT_NEAR(replay.witness[i], best.signal[i], 1e-9);
}

TEST(ReplayBest, AllZeroIsFreeDissipativeEvolution) {
  const ControlConfig cfg = physics_config();
  const Trajectory replay = replay_best(PulseSequence::constant(cfg.omega_max, 0), cfg);
  DrivenSystem system(cfg.params, cfg.dissipation, cfg.dt);
  const DensityMatrix free = system.evolve(initial_state(cfg), 0.0, kTotalTime);
  EXPECT_NEAR(replay.witness.back(), entanglement_witness(free), 1e-9);
  EXPECT_LT((replay.final_state->matrix() - free.matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ReplayBest, AllMaxMatchesConstantDrive) {
  const ControlConfig cfg = physics_config();
  const Trajectory replay = replay_best(PulseSequence::constant(cfg.omega_max, 2), cfg);
  const Trajectory direct = propagate(initial_state(cfg), PulseSequence::constant(0.3, 2), cfg.params, cfg.dissipation);
  ASSERT_EQ(replay.witness.size(), direct.witness.size());
  for (std::size_t i = 0; i < direct.witness.size(); ++i) EXPECT_NEAR(replay.witness[i], direct.witness[i], 1e-12);
}

TEST(Artifacts, SequenceRoundTrip) {
  PulseSequence::Levels levels{};
  for (int s = 0; s < kSegments; ++s) levels[s] = (s * 7) % 3;
  const PulseSequence seq(0.3, levels);
  std::stringstream io;
  write_sequence(io, seq, "00ff00ff00ff00ff");
  const std::string text = io.str();
  EXPECT_EQ(text.rfind("# omega_max=0.29999999999999999 config_hash=00ff00ff00ff00ff\n", 0), 0u);
  const SequenceArtifact back = read_sequence(io);
  EXPECT_TRUE(back.sequence == seq);
  EXPECT_EQ(back.config_hash, "00ff00ff00ff00ff");
}

TEST(Artifacts, RejectsMalformedSequences) {
  std::istringstream no_header("0 1 2\n");
  EXPECT_THROW((void)read_sequence(no_header), ConfigError);
  std::istringstream short_list("# omega_max=0.3 config_hash=x\n0 1 2\n");
  EXPECT_THROW((void)read_sequence(short_list), ConfigError);
  std::string bad = "# omega_max=0.3 config_hash=x\n";
  for (int s = 0; s < kSegments; ++s) bad += "5 ";
  std::istringstream bad_level(bad);
  EXPECT_THROW((void)read_sequence(bad_level), ConfigError);
}

TEST(Artifacts, TrainingLogLines) {
  ToyEnvironment env;
  DqnConfig cfg;
  cfg.epochs = 3;
  const TrainingResult res = train_round(env, cfg);
  std::stringstream out;
  write_training_log(out, res);
  std::string line;
  int n = 0;
  while (std::getline(out, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("epoch").get<int>(), n);
    EXPECT_TRUE(j.contains("return"));
    EXPECT_TRUE(j.at("time_averaged_ET").is_null());
    EXPECT_EQ(j.at("pulse_sequence").size(), 3u);
    ++n;
  }
  EXPECT_EQ(n, 3);
}

}  // namespace
}  // namespace rabiq::rl
