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

#pragma once

// Deep Q-learning over an Environment: epsilon-greedy rollouts, replay,
// Huber temporal-difference loss, AdamW updates and a periodically synced
// target network. One call to train_round is one training round.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"
#include "rabiq/lindblad.hpp"
#include "rabiq/rl/adamw.hpp"
#include "rabiq/rl/environment.hpp"
#include "rabiq/rl/network.hpp"
#include "rabiq/rl/replay.hpp"

namespace rabiq::rl {

struct DqnConfig {
  int epochs = 100;
  int hidden = kHiddenWidth;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 64;
  double discount = 0.99;
  int target_sync_interval = 100;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_epochs = 50;
  double huber_delta = 1.0;
  AdamWConfig optimizer;
  /// Greedy evaluation rollouts are run after each of the first and last
  /// this-many epochs.
  int greedy_eval_epochs = 10;
  std::uint64_t seed = 0;
};

/// Linear decay from epsilon_start to epsilon_end over the decay epochs.
inline double epsilon_at(const DqnConfig& cfg, int epoch) {
  if (epoch >= cfg.epsilon_decay_epochs) return cfg.epsilon_end;
  const double frac = static_cast<double>(epoch) / cfg.epsilon_decay_epochs;
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

/// Argmax with ties resolved to the lowest index.
inline int greedy_action(const Eigen::Vector3d& q) {
  int best = 0;
  for (int a = 1; a < kActionCount; ++a)
    if (q(a) > q(best)) best = a;
  return best;
}

inline int select_action(const QNetwork& net, const Eigen::VectorXd& features, double epsilon, std::mt19937_64& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, kActionCount - 1);
    return pick(rng);
  }
  return greedy_action(net.q_values(features));
}

struct EpochRecord {
  int epoch = 0;
  double episode_return = 0.0;
  double epsilon = 0.0;
  std::vector<int> actions;
  /// Figure of merit at every step boundary (E^T for the control problem).
  std::vector<double> signal;
  bool diverged = false;
  /// Actions of the greedy evaluation rollout, when one was run.
  std::vector<int> greedy_actions;

  [[nodiscard]] double time_averaged_signal() const {
    if (signal.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double v : signal) s += v;
    return s / static_cast<double>(signal.size());
  }
};

struct TrainingResult {
  std::vector<EpochRecord> epochs;
  /// Index of the epoch whose sequence maximises the time-averaged signal.
  std::optional<int> best_epoch;
  QNetwork network;
  std::vector<std::string> log;

  [[nodiscard]] const EpochRecord& best() const {
    if (!best_epoch) throw Error("no successful epoch to choose from");
    return epochs.at(*best_epoch);
  }

  /// Frequency of `action` among greedy evaluation rollouts of epochs in [begin, end).
  [[nodiscard]] double greedy_action_frequency(int action, int begin, int end) const {
    long hits = 0;
    long total = 0;
    for (int e = std::max(0, begin); e < std::min<int>(end, static_cast<int>(epochs.size())); ++e) {
      for (int a : epochs[e].greedy_actions) {
        hits += a == action ? 1 : 0;
        ++total;
      }
    }
    return total == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(hits) / total;
  }
};

namespace detail {

inline void gradient_step(QNetwork& net, const QNetwork& target, OptimizerState& opt, const ReplayBuffer& buffer,
                          const Environment& env, const DqnConfig& cfg, std::mt19937_64& rng,
                          Eigen::VectorXd& gradient) {
  const auto batch = buffer.sample(cfg.batch_size, rng);
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd states(kObservationDim, n);
  Eigen::MatrixXd next_states(kObservationDim, n);
  std::vector<int> actions(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    states.col(i) = env.features(batch[i]->state);
    next_states.col(i) = env.features(batch[i]->next_state);
    actions[i] = batch[i]->action;
  }
  const Eigen::MatrixXd next_q = target.forward(next_states);
  Eigen::VectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double bootstrap = batch[i]->done ? 0.0 : cfg.discount * next_q.col(i).maxCoeff();
    targets(i) = batch[i]->reward + bootstrap;
  }
  net.loss_and_gradient(states, actions, targets, gradient, cfg.huber_delta);
  adamw_update(net.parameters(), gradient, opt);
}

inline std::vector<int> greedy_rollout(const QNetwork& net, Environment& env) {
  std::vector<int> actions;
  ObservationVector obs = env.reset();
  for (int t = 0; t < env.horizon(); ++t) {
    const int a = greedy_action(net.q_values(env.features(obs)));
    actions.push_back(a);
    const StepResult r = env.step(a);
    obs = r.observation;
    if (r.done) break;
  }
  return actions;
}

}  // namespace detail

/// One training round of `cfg.epochs` episodes. Deterministic for a given
/// seed. Episodes whose propagation diverges are recorded as diverged and
/// excluded from the best-sequence choice.
inline TrainingResult train_round(Environment& env, const DqnConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  TrainingResult result{{}, std::nullopt, QNetwork(rng, cfg.hidden), {}};
  QNetwork& net = result.network;
  QNetwork target = net;
  OptimizerState opt(net.parameters().size(), cfg.optimizer);
  ReplayBuffer buffer(cfg.buffer_capacity);
  Eigen::VectorXd gradient;
  long gradient_steps = 0;
  double best_score = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.epsilon = epsilon_at(cfg, epoch);
    try {
      ObservationVector obs = env.reset();
      for (int t = 0; t < env.horizon(); ++t) {
        const int a = select_action(net, env.features(obs), rec.epsilon, rng);
        const StepResult r = env.step(a);
        rec.actions.push_back(a);
        rec.episode_return += r.reward;
        buffer.push({obs, a, r.reward, r.observation, r.done});
        if (buffer.size() >= cfg.batch_size) {
          detail::gradient_step(net, target, opt, buffer, env, cfg, rng, gradient);
          if (++gradient_steps % cfg.target_sync_interval == 0) target = net;
        }
        obs = r.observation;
        if (r.done) break;
      }
      rec.signal = env.episode_signal();
    } catch (const IntegrationDiverged& e) {
      rec.diverged = true;
      result.log.push_back("epoch " + std::to_string(epoch) + " discarded: " + e.what());
    }

    const bool evaluate = epoch < cfg.greedy_eval_epochs || epoch >= cfg.epochs - cfg.greedy_eval_epochs;
    if (evaluate) {
      try {
        rec.greedy_actions = detail::greedy_rollout(net, env);
      } catch (const IntegrationDiverged& e) {
        result.log.push_back("greedy rollout after epoch " + std::to_string(epoch) + " failed: " + e.what());
      }
    }

    if (!rec.diverged) {
      const double score = rec.signal.empty() ? rec.episode_return : rec.time_averaged_signal();
      if (score > best_score) {
        best_score = score;
        result.best_epoch = epoch;
      }
    }
    result.epochs.push_back(std::move(rec));
  }
  return result;
}

inline PulseSequence to_pulse(double omega_max, const std::vector<int>& actions) {
  if (actions.size() != static_cast<std::size_t>(kSegments)) throw DimensionMismatch("pulse needs 30 actions");
  PulseSequence::Levels levels;
  std::copy(actions.begin(), actions.end(), levels.begin());
  return {omega_max, levels};
}

/// Open-loop application of a stored sequence from the configured initial state.
inline Trajectory replay_best(const PulseSequence& sequence, const ControlConfig& cfg) {
  DrivenSystem system(cfg.params, cfg.dissipation, cfg.dt);
  return propagate(initial_state(cfg), sequence, system, Observables(cfg.params.m_trunc));
}

}  // namespace rabiq::rl
