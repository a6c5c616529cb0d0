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

// Operators and states of the truncated qubit (x) cavity Hilbert space.
//
// Tensor ordering is qubit (x) cavity throughout: the joint basis index of
// |q, n> is q * M + n, with M the cavity truncation. The qubit basis puts the
// excited level first, so sigma_z = diag(+1, -1). Energies are measured in
// units of the cavity detuning delta_c.

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "rabiq/errors.hpp"

namespace rabiq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr int kQubitDim = 2;

enum class QubitLevel { up = 0, down = 1 };
enum class Subsystem { qubit, cavity };

/// Parameters of the two-photon-driven Rabi Hamiltonian.
struct ModelParams {
  double delta_c = 1.0;
  double delta_q = 1.0;
  double g = 0.0;
  double omega = 0.0;
  double kerr = 0.0;
  int m_trunc = 60;

  void validate() const {
    if (m_trunc < 2) {
      throw InvalidDimension("cavity truncation must be >= 2, got " + std::to_string(m_trunc));
    }
    for (double v : {delta_c, delta_q, g, omega, kerr}) {
      if (!std::isfinite(v)) throw Error("model parameters must be finite");
    }
  }

  [[nodiscard]] int joint_dim() const { return kQubitDim * m_trunc; }
};

struct CavityOperators {
  ComplexMatrix a;
  ComplexMatrix a_dag;
  ComplexMatrix n_op;
};

struct QubitOperators {
  ComplexMatrix sigma_z;
  ComplexMatrix sigma_plus;
  ComplexMatrix sigma_minus;
};

inline CavityOperators build_cavity_operators(int m_trunc) {
  if (m_trunc < 2) {
    throw InvalidDimension("cavity truncation must be >= 2, got " + std::to_string(m_trunc));
  }
  CavityOperators ops;
  ops.a = ComplexMatrix::Zero(m_trunc, m_trunc);
  for (int n = 0; n + 1 < m_trunc; ++n) ops.a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
  ops.a_dag = ops.a.adjoint();
  ops.n_op = ops.a_dag * ops.a;
  return ops;
}

inline QubitOperators build_qubit_operators() {
  QubitOperators ops;
  ops.sigma_z = ComplexMatrix::Zero(2, 2);
  ops.sigma_z(0, 0) = 1.0;
  ops.sigma_z(1, 1) = -1.0;
  // sigma_plus raises |down> (index 1) to |up> (index 0).
  ops.sigma_plus = ComplexMatrix::Zero(2, 2);
  ops.sigma_plus(0, 1) = 1.0;
  ops.sigma_minus = ops.sigma_plus.adjoint();
  return ops;
}

/// qubit_op (x) 1_M
inline ComplexMatrix embed_qubit(const ComplexMatrix& qubit_op, int m_trunc) {
  return Eigen::kroneckerProduct(qubit_op, ComplexMatrix::Identity(m_trunc, m_trunc)).eval();
}

/// 1_2 (x) cavity_op
inline ComplexMatrix embed_cavity(const ComplexMatrix& cavity_op) {
  return Eigen::kroneckerProduct(ComplexMatrix::Identity(kQubitDim, kQubitDim), cavity_op).eval();
}

/// Bare operators lifted to the joint space of a given truncation.
struct JointOperators {
  int m_trunc = 0;
  ComplexMatrix a;
  ComplexMatrix a_dag;
  ComplexMatrix sigma_z;
  ComplexMatrix sigma_plus;
  ComplexMatrix sigma_minus;

  explicit JointOperators(int m) : m_trunc(m) {
    const auto cav = build_cavity_operators(m);
    const auto qb = build_qubit_operators();
    a = embed_cavity(cav.a);
    a_dag = embed_cavity(cav.a_dag);
    sigma_z = embed_qubit(qb.sigma_z, m);
    sigma_plus = embed_qubit(qb.sigma_plus, m);
    sigma_minus = embed_qubit(qb.sigma_minus, m);
  }

  [[nodiscard]] ComplexMatrix cavity_quadrature() const { return a + a_dag; }
  [[nodiscard]] ComplexMatrix qubit_quadrature() const { return sigma_plus + sigma_minus; }
};

/// Drive-independent part and unit two-photon drive of the Hamiltonian, so
/// that H(Omega) = static_part + Omega * drive.
struct HamiltonianTerms {
  ComplexMatrix static_part;
  ComplexMatrix drive;

  [[nodiscard]] ComplexMatrix at(double omega) const { return static_part + omega * drive; }
};

inline HamiltonianTerms hamiltonian_terms(const ModelParams& p) {
  p.validate();
  const int m = p.m_trunc;
  const auto cav = build_cavity_operators(m);
  const auto qb = build_qubit_operators();

  ComplexMatrix kerr_cav = cav.a_dag * cav.a_dag * cav.a * cav.a;
  ComplexMatrix cavity_part = p.delta_c * cav.n_op + p.kerr * kerr_cav;

  HamiltonianTerms terms;
  terms.static_part = embed_cavity(cavity_part) + 0.5 * p.delta_q * embed_qubit(qb.sigma_z, m) +
                      p.g * Eigen::kroneckerProduct(qb.sigma_minus + qb.sigma_plus, cav.a + cav.a_dag).eval();
  terms.drive = embed_cavity(cav.a * cav.a + cav.a_dag * cav.a_dag);
  return terms;
}

/// H = dc a'a + (dq/2) sz + g (a + a')(s- + s+) + Omega (a^2 + a'^2) + K a'^2 a^2
inline ComplexMatrix build_hamiltonian(const ModelParams& p) {
  return hamiltonian_terms(p).at(p.omega);
}

/// Joint qubit (x) cavity density matrix.
class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix matrix, int m_trunc) : matrix_(std::move(matrix)), m_trunc_(m_trunc) {
    if (m_trunc_ < 2) throw InvalidDimension("cavity truncation must be >= 2");
    if (matrix_.rows() != kQubitDim * m_trunc_ || matrix_.cols() != kQubitDim * m_trunc_) {
      throw DimensionMismatch("density matrix must be (2M)x(2M)");
    }
  }

  static DensityMatrix from_pure(const ComplexVector& psi, int m_trunc) {
    return DensityMatrix(psi * psi.adjoint(), m_trunc);
  }

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] int cavity_dim() const { return m_trunc_; }
  [[nodiscard]] int dim() const { return static_cast<int>(matrix_.rows()); }

  /// Tr(rho * op)
  [[nodiscard]] Complex expectation(const ComplexMatrix& op) const {
    return matrix_.transpose().cwiseProduct(op).sum();
  }

  [[nodiscard]] double trace_deviation() const { return std::abs(matrix_.trace() - Complex(1.0)); }

  [[nodiscard]] double hermiticity_error() const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  }

  [[nodiscard]] double min_eigenvalue() const {
    const ComplexMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
  }

  [[nodiscard]] double purity() const { return (matrix_ * matrix_).trace().real(); }

  /// Throws InvalidState unless trace, hermiticity and positivity hold.
  void validate(double trace_tol = 1e-8, double herm_tol = 1e-10, double eig_tol = 1e-8) const {
    if (trace_deviation() > trace_tol) throw InvalidState("density matrix trace deviates from 1");
    if (hermiticity_error() > herm_tol) throw InvalidState("density matrix is not Hermitian");
    if (min_eigenvalue() < -eig_tol) throw InvalidState("density matrix has a negative eigenvalue");
  }

 private:
  ComplexMatrix matrix_;
  int m_trunc_;
};

inline ComplexVector qubit_ket(QubitLevel level) {
  ComplexVector v = ComplexVector::Zero(kQubitDim);
  v(static_cast<int>(level)) = 1.0;
  return v;
}

inline ComplexVector fock_ket(int n, int m_trunc) {
  if (n < 0 || n >= m_trunc) throw InvalidIndex("Fock index outside truncation");
  ComplexVector v = ComplexVector::Zero(m_trunc);
  v(n) = 1.0;
  return v;
}

/// Truncated coherent state, renormalised after truncation.
inline ComplexVector coherent_ket(Complex alpha, int m_trunc) {
  if (m_trunc < 2) throw InvalidDimension("cavity truncation must be >= 2");
  if (std::norm(alpha) > m_trunc / 10.0) {
    throw TruncationOverflow("|alpha|^2 exceeds M/10 for the requested truncation");
  }
  ComplexVector v(m_trunc);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < m_trunc; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v / v.norm();
}

/// |qubit> (x) |cavity>
inline ComplexVector product_ket(QubitLevel level, const ComplexVector& cavity) {
  return Eigen::kroneckerProduct(qubit_ket(level), cavity).eval();
}

inline DensityMatrix coherent_product_state(Complex alpha, QubitLevel level, int m_trunc) {
  return DensityMatrix::from_pure(product_ket(level, coherent_ket(alpha, m_trunc)), m_trunc);
}

inline DensityMatrix fock_product_state(int n, QubitLevel level, int m_trunc) {
  return DensityMatrix::from_pure(product_ket(level, fock_ket(n, m_trunc)), m_trunc);
}

/// rho_qubit (x) rho_cavity
inline DensityMatrix product_state(const ComplexMatrix& rho_qubit, const ComplexMatrix& rho_cavity) {
  if (rho_qubit.rows() != kQubitDim) throw DimensionMismatch("qubit factor must be 2x2");
  return DensityMatrix(Eigen::kroneckerProduct(rho_qubit, rho_cavity).eval(),
                       static_cast<int>(rho_cavity.rows()));
}

}  // namespace rabiq
