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

// Fully connected action-value network 6 -> 64 -> 64 -> 3 with ReLU hidden
// activations, trained with a Huber loss on the Q-value of the taken action.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"

namespace rabiq::rl {

inline constexpr int kObservationDim = 6;
inline constexpr int kActionCount = 3;
inline constexpr int kHiddenWidth = 64;

/// e^2/2 inside |e| <= delta, delta (|e| - delta/2) outside.
inline double huber_loss(double error, double delta = 1.0) {
  const double a = std::abs(error);
  return a <= delta ? 0.5 * error * error : delta * (a - 0.5 * delta);
}

inline double huber_derivative(double error, double delta = 1.0) {
  return std::clamp(error, -delta, delta);
}

class QNetwork {
 public:
  explicit QNetwork(int hidden = kHiddenWidth) : hidden_(hidden), params_(Eigen::VectorXd::Zero(parameter_count(hidden))) {}

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation of every
  /// weight and bias.
  QNetwork(std::mt19937_64& rng, int hidden = kHiddenWidth) : QNetwork(hidden) {
    auto fill = [&](Eigen::Map<Eigen::MatrixXd> block, int fan_in) {
      std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
      for (Eigen::Index j = 0; j < block.cols(); ++j)
        for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = u(rng);
    };
    fill(w1(), kObservationDim);
    fill(as_matrix(b1()), kObservationDim);
    fill(w2(), hidden_);
    fill(as_matrix(b2()), hidden_);
    fill(w3(), hidden_);
    fill(as_matrix(b3()), hidden_);
  }

  static Eigen::Index parameter_count(int hidden) {
    return static_cast<Eigen::Index>(hidden) * kObservationDim + hidden + static_cast<Eigen::Index>(hidden) * hidden +
           hidden + static_cast<Eigen::Index>(kActionCount) * hidden + kActionCount;
  }

  [[nodiscard]] int hidden() const { return hidden_; }
  [[nodiscard]] Eigen::VectorXd& parameters() { return params_; }
  [[nodiscard]] const Eigen::VectorXd& parameters() const { return params_; }

  /// Q-values for a batch; inputs and outputs are column-per-sample.
  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const {
    Activations act = run(inputs);
    return std::move(act.q);
  }

  [[nodiscard]] Eigen::Vector3d q_values(const Eigen::VectorXd& input) const { return forward(input).col(0); }

  /// Mean Huber loss of Q(s_i, a_i) against targets, with its gradient with
  /// respect to the flat parameter vector written into `gradient`.
  double loss_and_gradient(const Eigen::MatrixXd& inputs, const std::vector<int>& actions,
                           const Eigen::VectorXd& targets, Eigen::VectorXd& gradient, double delta = 1.0) const {
    const Eigen::Index batch = inputs.cols();
    if (static_cast<Eigen::Index>(actions.size()) != batch || targets.size() != batch) {
      throw DimensionMismatch("batch sizes of inputs, actions and targets differ");
    }
    const Activations act = run(inputs);
    Eigen::MatrixXd d_q = Eigen::MatrixXd::Zero(kActionCount, batch);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
      const double err = act.q(actions[i], i) - targets(i);
      loss += huber_loss(err, delta);
      d_q(actions[i], i) = huber_derivative(err, delta) / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);

    gradient.setZero(params_.size());
    QNetwork view(hidden_);
    view.params_.swap(gradient);
    view.w3() = d_q * act.h2.transpose();
    view.b3() = d_q.rowwise().sum();
    Eigen::MatrixXd d_h2 = (w3c().transpose() * d_q).cwiseProduct(relu_mask(act.h2));
    view.w2() = d_h2 * act.h1.transpose();
    view.b2() = d_h2.rowwise().sum();
    Eigen::MatrixXd d_h1 = (w2c().transpose() * d_h2).cwiseProduct(relu_mask(act.h1));
    view.w1() = d_h1 * inputs.transpose();
    view.b1() = d_h1.rowwise().sum();
    view.params_.swap(gradient);
    return loss;
  }

  /// Loss only, for finite-difference checks.
  [[nodiscard]] double loss(const Eigen::MatrixXd& inputs, const std::vector<int>& actions,
                            const Eigen::VectorXd& targets, double delta = 1.0) const {
    const Eigen::MatrixXd q = forward(inputs);
    double total = 0.0;
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) total += huber_loss(q(actions[i], i) - targets(i), delta);
    return total / static_cast<double>(inputs.cols());
  }

 private:
  struct Activations {
    Eigen::MatrixXd h1;
    Eigen::MatrixXd h2;
    Eigen::MatrixXd q;
  };

  static Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& h) { return (h.array() > 0.0).cast<double>().matrix(); }

  [[nodiscard]] Activations run(const Eigen::MatrixXd& x) const {
    if (x.rows() != kObservationDim) throw DimensionMismatch("network input must have 6 rows");
    Activations a;
    a.h1 = ((w1c() * x).colwise() + b1c()).cwiseMax(0.0);
    a.h2 = ((w2c() * a.h1).colwise() + b2c()).cwiseMax(0.0);
    a.q = (w3c() * a.h2).colwise() + b3c();
    return a;
  }

  // Flat layout: W1 (h x 6), b1, W2 (h x h), b2, W3 (3 x h), b3; column-major.
  [[nodiscard]] Eigen::Index off_b1() const { return static_cast<Eigen::Index>(hidden_) * kObservationDim; }
  [[nodiscard]] Eigen::Index off_w2() const { return off_b1() + hidden_; }
  [[nodiscard]] Eigen::Index off_b2() const { return off_w2() + static_cast<Eigen::Index>(hidden_) * hidden_; }
  [[nodiscard]] Eigen::Index off_w3() const { return off_b2() + hidden_; }
  [[nodiscard]] Eigen::Index off_b3() const { return off_w3() + static_cast<Eigen::Index>(kActionCount) * hidden_; }

  Eigen::Map<Eigen::MatrixXd> w1() { return {params_.data(), hidden_, kObservationDim}; }
  Eigen::Map<Eigen::VectorXd> b1() { return {params_.data() + off_b1(), hidden_}; }
  Eigen::Map<Eigen::MatrixXd> w2() { return {params_.data() + off_w2(), hidden_, hidden_}; }
  Eigen::Map<Eigen::VectorXd> b2() { return {params_.data() + off_b2(), hidden_}; }
  Eigen::Map<Eigen::MatrixXd> w3() { return {params_.data() + off_w3(), kActionCount, hidden_}; }
  Eigen::Map<Eigen::VectorXd> b3() { return {params_.data() + off_b3(), kActionCount}; }

  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> w1c() const { return {params_.data(), hidden_, kObservationDim}; }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> b1c() const { return {params_.data() + off_b1(), hidden_}; }
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> w2c() const { return {params_.data() + off_w2(), hidden_, hidden_}; }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> b2c() const { return {params_.data() + off_b2(), hidden_}; }
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> w3c() const {
    return {params_.data() + off_w3(), kActionCount, hidden_};
  }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> b3c() const { return {params_.data() + off_b3(), kActionCount}; }

  static Eigen::Map<Eigen::MatrixXd> as_matrix(Eigen::Map<Eigen::VectorXd> v) { return {v.data(), v.size(), 1}; }

  int hidden_;
  Eigen::VectorXd params_;
};

}  // namespace rabiq::rl
