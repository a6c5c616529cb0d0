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

#include <cmath>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"

namespace rabiq::rl {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

struct OptimizerState {
  AdamWConfig config;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;

  OptimizerState(Eigen::Index size, AdamWConfig cfg = {})
      : config(cfg), first_moment(Eigen::VectorXd::Zero(size)), second_moment(Eigen::VectorXd::Zero(size)) {}
};

/// Adam with decoupled weight decay: the decay -lr * lambda * w is applied
/// to the weights directly, then the bias-corrected moment step.
inline void adamw_update(Eigen::VectorXd& params, const Eigen::VectorXd& grads, OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionMismatch("parameter, gradient and optimizer sizes differ");
  }
  if (!grads.allFinite()) throw GradientOverflow("non-finite gradient");
  const AdamWConfig& c = state.config;
  ++state.step;
  params *= 1.0 - c.learning_rate * c.weight_decay;
  state.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * grads;
  state.second_moment = c.beta2 * state.second_moment + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  params.array() -= c.learning_rate * (state.first_moment.array() / bias1) /
                    ((state.second_moment.array() / bias2).sqrt() + c.epsilon);
}

}  // namespace rabiq::rl
