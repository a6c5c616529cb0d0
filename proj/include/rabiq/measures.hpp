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

// Diagnostics evaluated on joint and reduced states: partial transpose and
// the entanglement witness built from it, dressed g2, Wigner function and
// its negativity average, partial traces, and the six-component observation
// vector fed to the control agent.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"
#include "rabiq/fock.hpp"
#include "rabiq/spectral.hpp"

namespace rabiq {

/// Eigenvalues with magnitude below this are treated as zero by the witness.
inline constexpr double kWitnessClip = 1e-9;

inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, int m_trunc, Subsystem subsystem) {
  if (rho.rows() != kQubitDim * m_trunc || rho.cols() != rho.rows()) {
    throw DimensionMismatch("matrix does not match the joint dimension");
  }
  const int m = m_trunc;
  ComplexMatrix out(rho.rows(), rho.cols());
  for (int qa = 0; qa < kQubitDim; ++qa) {
    for (int qb = 0; qb < kQubitDim; ++qb) {
      if (subsystem == Subsystem::qubit) {
        out.block(qa * m, qb * m, m, m) = rho.block(qb * m, qa * m, m, m);
      } else {
        out.block(qa * m, qb * m, m, m) = rho.block(qa * m, qb * m, m, m).transpose();
      }
    }
  }
  return out;
}

inline ComplexMatrix partial_transpose(const DensityMatrix& rho, Subsystem subsystem) {
  return partial_transpose(rho.matrix(), rho.cavity_dim(), subsystem);
}

/// Sum of |lambda| over the negative eigenvalues of the qubit-transposed state.
inline double entanglement_witness(const DensityMatrix& rho) {
  ComplexMatrix pt = partial_transpose(rho, Subsystem::qubit);
  pt = 0.5 * (pt + pt.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(pt, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda < -kWitnessClip) sum -= lambda;
  }
  return sum;
}

/// Partial trace keeping one factor.
inline ComplexMatrix reduce(const DensityMatrix& rho, Subsystem keep) {
  const int m = rho.cavity_dim();
  const auto& r = rho.matrix();
  if (keep == Subsystem::qubit) {
    ComplexMatrix out(kQubitDim, kQubitDim);
    for (int qa = 0; qa < kQubitDim; ++qa)
      for (int qb = 0; qb < kQubitDim; ++qb) out(qa, qb) = r.block(qa * m, qb * m, m, m).trace();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(m, m);
  for (int q = 0; q < kQubitDim; ++q) out += r.block(q * m, q * m, m, m);
  return out;
}

/// Equal-time second-order correlation in the dressed basis,
/// Tr[rho X- X- X+ X+] / Tr[rho X- X+]^2, where X+ is the dressed lowering
/// (positive-frequency) part. Reduces to <a'^2 a^2>/<a'a>^2 at weak coupling.
inline double second_order_correlation(const DensityMatrix& rho, const DressedOperator& dressed) {
  if (dressed.x_plus.rows() != rho.dim()) throw DimensionMismatch("dressed operator dimension mismatch");
  const ComplexMatrix pair = dressed.x_minus * dressed.x_plus;
  const double population = rho.expectation(pair).real();
  if (std::abs(population) < 1e-12) {
    throw ZeroPopulation("dressed population vanishes; g2 undefined");
  }
  const ComplexMatrix lowered = dressed.x_plus * dressed.x_plus;
  const double numerator = rho.expectation(lowered.adjoint() * lowered).real();
  return numerator / (population * population);
}

/// Rectangular phase-space grid, endpoints included.
struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  double p_min = -5.0;
  double p_max = 5.0;
  int n_x = 100;
  int n_p = 100;

  [[nodiscard]] double x_at(int i) const { return n_x == 1 ? x_min : x_min + (x_max - x_min) * i / (n_x - 1); }
  [[nodiscard]] double p_at(int j) const { return n_p == 1 ? p_min : p_min + (p_max - p_min) * j / (n_p - 1); }
  [[nodiscard]] double dx() const { return n_x == 1 ? 0.0 : (x_max - x_min) / (n_x - 1); }
  [[nodiscard]] double dp() const { return n_p == 1 ? 0.0 : (p_max - p_min) / (n_p - 1); }
};

struct WignerGrid {
  GridSpec spec;
  /// values(i, j) = W(x_i, p_j)
  RealMatrix values;

  [[nodiscard]] int sample_count() const { return static_cast<int>(values.size()); }
  [[nodiscard]] double riemann_sum() const { return values.sum() * spec.dx() * spec.dp(); }
};

/// W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dagger] with alpha = x + i p,
/// so that vacuum peaks at 2/pi and the distribution integrates to 1 over dx dp.
///
/// Evaluated with the three-term recurrence for the displaced-parity matrix
/// elements <n| D P D^dagger |m>.
inline double wigner_point(const ComplexMatrix& rho_cavity, double x, double p) {
  const int m_dim = static_cast<int>(rho_cavity.rows());
  const Complex alpha(x, p);
  const Complex two_alpha = 2.0 * alpha;
  const Complex two_alpha_conj = std::conj(two_alpha);
  std::vector<Complex> column(m_dim);

  column[0] = 2.0 / std::numbers::pi * std::exp(-2.0 * std::norm(alpha));
  double w = rho_cavity(0, 0).real() * column[0].real();
  for (int n = 1; n < m_dim; ++n) {
    column[n] = two_alpha * column[n - 1] / std::sqrt(static_cast<double>(n));
    w += 2.0 * (rho_cavity(0, n) * column[n]).real();
  }
  for (int m = 1; m < m_dim; ++m) {
    const double sm = std::sqrt(static_cast<double>(m));
    Complex previous = column[m];
    column[m] = (two_alpha_conj * previous - sm * column[m - 1]) / sm;
    w += (rho_cavity(m, m) * column[m]).real();
    for (int n = m + 1; n < m_dim; ++n) {
      const Complex next = (two_alpha * column[n - 1] - sm * previous) / std::sqrt(static_cast<double>(n));
      previous = column[n];
      column[n] = next;
      w += 2.0 * (rho_cavity(m, n) * column[n]).real();
    }
  }
  return w;
}

inline WignerGrid wigner(const ComplexMatrix& rho_cavity, const GridSpec& spec = {}) {
  if (rho_cavity.rows() != rho_cavity.cols()) throw DimensionMismatch("cavity state must be square");
  if (spec.n_x < 1 || spec.n_p < 1) throw InvalidDimension("grid needs at least one point per axis");
  WignerGrid grid{spec, RealMatrix(spec.n_x, spec.n_p)};
  for (int i = 0; i < spec.n_x; ++i)
    for (int j = 0; j < spec.n_p; ++j) grid.values(i, j) = wigner_point(rho_cavity, spec.x_at(i), spec.p_at(j));
  return grid;
}

/// Sum of the negative samples divided by the total sample count.
inline double wigner_negativity_average(const WignerGrid& grid) {
  if (grid.values.size() == 0) return 0.0;
  return grid.values.cwiseMin(0.0).sum() / static_cast<double>(grid.values.size());
}

/// <a'a>, <s+s->, <(a'+a)^2>, <a'+a>, <(s+ + s-)^2>, <s+ + s->
struct ObservationVector {
  std::array<double, 6> values{};

  [[nodiscard]] double photon_number() const { return values[0]; }
  [[nodiscard]] double excitation() const { return values[1]; }
  [[nodiscard]] double cavity_quadrature_sq() const { return values[2]; }
  [[nodiscard]] double cavity_quadrature() const { return values[3]; }
  [[nodiscard]] double qubit_quadrature_sq() const { return values[4]; }
  [[nodiscard]] double qubit_quadrature() const { return values[5]; }

  friend bool operator==(const ObservationVector&, const ObservationVector&) = default;
};

/// Precomputed joint-space operators for the observation vector.
class Observables {
 public:
  explicit Observables(int m_trunc) : m_trunc_(m_trunc) {
    const JointOperators ops(m_trunc);
    const ComplexMatrix x = ops.cavity_quadrature();
    const ComplexMatrix s = ops.qubit_quadrature();
    operators_ = {ops.a_dag * ops.a, ops.sigma_plus * ops.sigma_minus, x * x, x, s * s, s};
  }

  [[nodiscard]] int m_trunc() const { return m_trunc_; }

  [[nodiscard]] ObservationVector observe(const DensityMatrix& rho) const {
    if (rho.cavity_dim() != m_trunc_) throw DimensionMismatch("state truncation differs from observables");
    ObservationVector obs;
    for (std::size_t k = 0; k < operators_.size(); ++k) {
      const Complex value = rho.expectation(operators_[k]);
      if (std::abs(value.imag()) > 1e-6) throw NumericalDrift("observable acquired an imaginary part");
      obs.values[k] = value.real();
    }
    return obs;
  }

 private:
  int m_trunc_;
  std::array<ComplexMatrix, 6> operators_;
};

inline ObservationVector observe(const DensityMatrix& rho) { return Observables(rho.cavity_dim()).observe(rho); }

}  // namespace rabiq
