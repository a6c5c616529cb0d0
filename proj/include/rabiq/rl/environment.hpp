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

// Episodic environments for the Q-learning agent: the driven dissipative
// qubit-cavity system, and a three-step toy problem with a known optimum.

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"
#include "rabiq/lindblad.hpp"
#include "rabiq/measures.hpp"
#include "rabiq/rl/network.hpp"
#include "rabiq/spectral.hpp"

namespace rabiq::rl {

struct StepResult {
  ObservationVector observation;
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual ObservationVector reset() = 0;
  virtual StepResult step(int action) = 0;
  [[nodiscard]] virtual int horizon() const = 0;

  /// Network input for an observation.
  [[nodiscard]] virtual Eigen::VectorXd features(const ObservationVector& obs) const {
    return Eigen::Map<const Eigen::VectorXd>(obs.values.data(), kObservationDim);
  }

  /// Figure of merit sampled at every step boundary of the current episode
  /// (horizon + 1 values once finished); empty if the environment has none.
  [[nodiscard]] virtual std::vector<double> episode_signal() const { return {}; }
};

/// Changes of E^T at or below this magnitude count as no increase.
inline constexpr double kRewardTolerance = 1e-10;

/// +10 for a strict increase of the witness, -1 otherwise.
inline double entanglement_reward(double delta_witness) { return delta_witness > kRewardTolerance ? 10.0 : -1.0; }

enum class InitialState { hamiltonian_ground, coherent_down };

inline std::string to_string(InitialState s) {
  return s == InitialState::hamiltonian_ground ? "ground" : "coherent_down";
}

inline InitialState parse_initial_state(const std::string& s) {
  if (s == "ground" || s == "hamiltonian_ground") return InitialState::hamiltonian_ground;
  if (s == "coherent_down" || s == "coherent") return InitialState::coherent_down;
  throw ConfigError("unknown initial state '" + s + "'");
}

struct ControlConfig {
  /// Static Hamiltonian parameters; `omega` is the drive used to prepare the
  /// ground initial state, the controlled drive comes from the actions.
  ModelParams params;
  double omega_max = 0.3;
  InitialState initial = InitialState::hamiltonian_ground;
  DissipationParams dissipation;
  double dt = kDefaultDt;
};

inline DensityMatrix initial_state(const ControlConfig& cfg) {
  if (cfg.initial == InitialState::coherent_down) {
    return coherent_product_state(1.0, QubitLevel::down, cfg.params.m_trunc);
  }
  return ground_state(cfg.params);
}

/// Thirty-segment control episode of the driven dissipative system.
class ControlEnvironment final : public Environment {
 public:
  explicit ControlEnvironment(ControlConfig cfg)
      : cfg_(std::move(cfg)),
        system_(cfg_.params, cfg_.dissipation, cfg_.dt),
        observables_(cfg_.params.m_trunc),
        rho0_(initial_state(cfg_)),
        rho_(rho0_),
        witness0_(entanglement_witness(rho0_)),
        obs0_(observables_.observe(rho0_)) {}

  [[nodiscard]] const ControlConfig& config() const { return cfg_; }
  [[nodiscard]] DrivenSystem& system() { return system_; }
  [[nodiscard]] const Observables& observables() const { return observables_; }
  [[nodiscard]] const DensityMatrix& initial() const { return rho0_; }
  [[nodiscard]] const DensityMatrix& state() const { return rho_; }
  [[nodiscard]] int time_step() const { return t_; }
  [[nodiscard]] bool done() const { return t_ >= kSegments; }
  /// Worst trace drift and smallest eigenvalue over every step taken so far.
  [[nodiscard]] double max_trace_drift() const { return max_trace_drift_; }
  [[nodiscard]] double min_eigenvalue() const { return min_eigenvalue_; }

  ObservationVector reset() override {
    rho_ = rho0_;
    t_ = 0;
    witness_.assign(1, witness0_);
    return obs0_;
  }

  StepResult step(int action) override {
    if (done()) throw EpisodeFinished("episode already reached its final segment");
    if (action < 0 || action >= kActionCount) throw InvalidIndex("action must be 0, 1 or 2");
    rho_ = system_.evolve(rho_, cfg_.omega_max * kActionFractions[action]);
    const StateCheck c = check_state(rho_);
    max_trace_drift_ = std::max(max_trace_drift_, c.trace_drift);
    min_eigenvalue_ = std::min(min_eigenvalue_, c.min_eigenvalue);
    const double witness = entanglement_witness(rho_);
    const double reward = entanglement_reward(witness - witness_.back());
    witness_.push_back(witness);
    ++t_;
    return {observables_.observe(rho_), reward, done()};
  }

  [[nodiscard]] int horizon() const override { return kSegments; }

  /// Fixed affine scaling: <a'a> / 10 and the quadratic moments / 20.
  [[nodiscard]] Eigen::VectorXd features(const ObservationVector& obs) const override {
    Eigen::VectorXd x(kObservationDim);
    x << obs.values[0] / 10.0, obs.values[1], obs.values[2] / 20.0, obs.values[3], obs.values[4] / 20.0,
        obs.values[5];
    return x;
  }

  [[nodiscard]] std::vector<double> episode_signal() const override { return witness_; }

 private:
  ControlConfig cfg_;
  DrivenSystem system_;
  Observables observables_;
  DensityMatrix rho0_;
  DensityMatrix rho_;
  double witness0_;
  ObservationVector obs0_;
  int t_ = 0;
  std::vector<double> witness_;
  double max_trace_drift_ = 0.0;
  double min_eigenvalue_ = std::numeric_limits<double>::infinity();
};

/// Three steps; action 2 earns +10, anything else -1. The observation is a
/// one-hot encoding of the step index.
class ToyEnvironment final : public Environment {
 public:
  static constexpr int kLength = 3;

  ObservationVector reset() override {
    t_ = 0;
    return encode(0);
  }

  StepResult step(int action) override {
    if (t_ >= kLength) throw EpisodeFinished("toy episode finished");
    ++t_;
    return {encode(t_), action == 2 ? 10.0 : -1.0, t_ >= kLength};
  }

  [[nodiscard]] int horizon() const override { return kLength; }

 private:
  static ObservationVector encode(int t) {
    ObservationVector o;
    o.values[t] = 1.0;
    return o;
  }
  int t_ = 0;
};

}  // namespace rabiq::rl
