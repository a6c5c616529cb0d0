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

// Dense eigendecomposition of the joint Hamiltonian and the quantities built
// directly on it: energy gaps, the truncation-convergence metric and dressed
// positive/negative-frequency operators.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"
#include "rabiq/fock.hpp"

namespace rabiq {

/// Ascending energies with orthonormal eigenvectors stored as columns.
struct Spectrum {
  RealVector energies;
  ComplexMatrix states;

  [[nodiscard]] int size() const { return static_cast<int>(energies.size()); }
  [[nodiscard]] ComplexVector state(int j) const { return states.col(j); }

  /// U^dagger op U
  [[nodiscard]] ComplexMatrix to_eigenbasis(const ComplexMatrix& op) const {
    return states.adjoint() * op * states;
  }
  /// U op U^dagger
  [[nodiscard]] ComplexMatrix from_eigenbasis(const ComplexMatrix& op) const {
    return states * op * states.adjoint();
  }
};

namespace detail {

inline double hermitian_tolerance(const ComplexMatrix& h) {
  return 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff());
}

// Rotates v so that its largest-magnitude component is real and positive.
// Near-ties resolve to the lowest index.
inline void fix_phase(Eigen::Ref<ComplexVector> v) {
  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= max_abs * (1.0 - 1e-12)) {
      pivot = i;
      break;
    }
  }
  v *= std::conj(v(pivot)) / std::abs(v(pivot));
}

inline bool lexicographic_less(const ComplexVector& x, const ComplexVector& y) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i).real() != y(i).real()) return x(i).real() < y(i).real();
    if (x(i).imag() != y(i).imag()) return x(i).imag() < y(i).imag();
  }
  return false;
}

}  // namespace detail

/// Full dense decomposition of a Hermitian matrix.
///
/// Energies are ascending. Each eigenvector is phase-fixed so that its
/// largest component is real positive; exactly degenerate levels are then
/// ordered lexicographically by their components.
inline Spectrum eigendecompose(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("Hamiltonian must be square");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > detail::hermitian_tolerance(h)) {
    throw NotHermitian("eigendecompose requires a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error("eigensolver did not converge");

  Spectrum s;
  s.energies = solver.eigenvalues();
  s.states = solver.eigenvectors();
  for (Eigen::Index j = 0; j < s.states.cols(); ++j) detail::fix_phase(s.states.col(j));

  const int n = static_cast<int>(s.energies.size());
  const double scale = std::max(1.0, s.energies.cwiseAbs().maxCoeff());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Only reorder within runs of (numerically) equal energies.
  int begin = 0;
  bool reordered = false;
  while (begin < n) {
    int end = begin + 1;
    while (end < n && s.energies(end) - s.energies(begin) <= 1e-12 * scale) ++end;
    if (end - begin > 1) {
      std::stable_sort(order.begin() + begin, order.begin() + end, [&](int i, int k) {
        return detail::lexicographic_less(s.states.col(i), s.states.col(k));
      });
      reordered = true;
    }
    begin = end;
  }
  if (reordered) {
    // Energies inside a run agree to rounding; keep them ascending as returned.
    const ComplexMatrix states = s.states;
    for (int j = 0; j < n; ++j) s.states.col(j) = states.col(order[j]);
  }
  return s;
}

inline Spectrum eigendecompose(const ModelParams& p) { return eigendecompose(build_hamiltonian(p)); }

/// E_q - E_0
inline double energy_gap(const Spectrum& s, int q) {
  if (q < 0 || q >= s.size()) throw InvalidIndex("gap index outside the spectrum");
  return s.energies(q) - s.energies(0);
}

inline DensityMatrix ground_state(const Spectrum& s, int m_trunc) {
  return DensityMatrix::from_pure(s.states.col(0), m_trunc);
}

inline DensityMatrix ground_state(const ModelParams& p) {
  return ground_state(eigendecompose(p), p.m_trunc);
}

/// Embeds a joint density matrix of truncation m_from into truncation m_to
/// (m_to >= m_from) by zero-padding the high cavity levels of each qubit block.
inline ComplexMatrix pad_cavity(const ComplexMatrix& rho, int m_from, int m_to) {
  if (m_to < m_from) throw InvalidDimension("padding target smaller than source");
  if (rho.rows() != kQubitDim * m_from) throw DimensionMismatch("matrix does not match truncation");
  ComplexMatrix out = ComplexMatrix::Zero(kQubitDim * m_to, kQubitDim * m_to);
  for (int qa = 0; qa < kQubitDim; ++qa) {
    for (int qb = 0; qb < kQubitDim; ++qb) {
      out.block(qa * m_to, qb * m_to, m_from, m_from) = rho.block(qa * m_from, qb * m_from, m_from, m_from);
    }
  }
  return out;
}

/// Truncation-convergence metric between ground states at M and M + q.
///
/// sum_ij |r_ij| * | log|r_ij| - log|p_ij| |, where r is the ground state at
/// M + q and p the zero-padded ground state at M. Entries that are exactly
/// zero contribute log(1) = 0 to the logarithms.
inline double kl_convergence(const ModelParams& p, int q) {
  if (q < 0) throw InvalidIndex("truncation offset must be non-negative");
  ModelParams larger = p;
  larger.m_trunc = p.m_trunc + q;
  const ComplexMatrix rho_small = ground_state(p).matrix();
  const ComplexMatrix rho_large = q == 0 ? rho_small : ground_state(larger).matrix();
  const ComplexMatrix padded = pad_cavity(rho_small, p.m_trunc, larger.m_trunc);

  auto safe_log = [](double x) { return x == 0.0 ? 0.0 : std::log(x); };
  double sum = 0.0;
  for (Eigen::Index j = 0; j < rho_large.cols(); ++j) {
    for (Eigen::Index i = 0; i < rho_large.rows(); ++i) {
      const double r = std::abs(rho_large(i, j));
      if (r == 0.0) continue;
      sum += r * std::abs(safe_log(r) - safe_log(std::abs(padded(i, j))));
    }
  }
  return sum;
}

/// Positive- and negative-frequency parts of a bare operator in the dressed
/// eigenbasis, expressed back in the bare basis.
struct DressedOperator {
  ComplexMatrix x_plus;
  ComplexMatrix x_minus;
};

/// x_plus = sum_{j, k>j} <j|bare|k> |j><k|, x_minus = x_plus^dagger
inline DressedOperator dressed_operator(const Spectrum& s, const ComplexMatrix& bare) {
  if (bare.rows() != s.states.rows() || bare.cols() != s.states.rows()) {
    throw DimensionMismatch("bare operator does not match the spectrum dimension");
  }
  ComplexMatrix elements = s.to_eigenbasis(bare);
  ComplexMatrix upper = elements.triangularView<Eigen::StrictlyUpper>();
  DressedOperator d;
  d.x_plus = s.from_eigenbasis(upper);
  d.x_minus = d.x_plus.adjoint();
  return d;
}

}  // namespace rabiq
