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

// Dressed-basis Lindblad dynamics under a piecewise-constant two-photon drive.
//
// Jump operators are projectors |j><k| between eigenstates of the
// instantaneous Hamiltonian. In that eigenbasis the generator splits into
// independent coherences rho_ab (a != b) and a classical rate equation for the
// populations, so each constant-drive segment of fixed-step RK4 collapses to
// an elementwise factor plus one real matrix acting on the diagonal.

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rabiq/errors.hpp"
#include "rabiq/fock.hpp"
#include "rabiq/measures.hpp"
#include "rabiq/spectral.hpp"

namespace rabiq {

/// Bose-Einstein occupation 1/(exp(delta/T) - 1), zero at T = 0.
inline double thermal_occupation(double delta_e, double temperature) {
  if (!(delta_e > 0.0)) throw InvalidGap("thermal occupation needs a positive transition energy");
  if (temperature < 0.0) throw Error("temperature must be non-negative");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(delta_e / temperature);
}

/// Bath occupation: either a fixed n-bar for every transition, or a
/// temperature from which n-bar(Delta_kj, T) is evaluated per transition.
class BathOccupation {
 public:
  static BathOccupation fixed(double nbar) {
    if (nbar < 0.0 || !std::isfinite(nbar)) throw Error("n-bar must be a finite non-negative number");
    return BathOccupation(nbar, 0.0);
  }
  static BathOccupation thermal(double temperature) {
    if (temperature < 0.0) throw Error("temperature must be non-negative");
    return BathOccupation(std::nullopt, temperature);
  }

  [[nodiscard]] double at(double delta_e) const {
    return nbar_ ? *nbar_ : thermal_occupation(delta_e, temperature_);
  }
  [[nodiscard]] bool is_fixed() const { return nbar_.has_value(); }
  [[nodiscard]] double value() const { return nbar_ ? *nbar_ : temperature_; }

 private:
  BathOccupation(std::optional<double> nbar, double temperature) : nbar_(nbar), temperature_(temperature) {}
  std::optional<double> nbar_;
  double temperature_;
};

enum class Bath { cavity, qubit };

/// One jump |to><from| between eigenstates of the basis it was built in.
struct DissipationChannel {
  double rate = 0.0;
  int to = 0;
  int from = 0;
  Bath bath = Bath::cavity;
  bool upward = false;
};

class DissipatorSet {
 public:
  DissipatorSet() = default;
  DissipatorSet(ComplexMatrix basis, std::vector<DissipationChannel> channels)
      : basis_(std::move(basis)), channels_(std::move(channels)) {}

  [[nodiscard]] const ComplexMatrix& basis() const { return basis_; }
  [[nodiscard]] const std::vector<DissipationChannel>& channels() const { return channels_; }
  [[nodiscard]] bool empty() const { return channels_.empty(); }
  [[nodiscard]] int dim() const { return static_cast<int>(basis_.rows()); }

  /// Jump operator of a channel in the bare basis.
  [[nodiscard]] ComplexMatrix jump_matrix(const DissipationChannel& c) const {
    return basis_.col(c.to) * basis_.col(c.from).adjoint();
  }

  /// Summed rates R(to, from) over every channel.
  [[nodiscard]] RealMatrix transition_rates() const {
    RealMatrix r = RealMatrix::Zero(dim(), dim());
    for (const auto& c : channels_) r(c.to, c.from) += c.rate;
    return r;
  }

 private:
  ComplexMatrix basis_;
  std::vector<DissipationChannel> channels_;
};

inline constexpr int kDefaultLevelCutoff = 40;
inline constexpr double kMinChannelRate = 1e-14;

/// Dressed jump channels for the cavity (a) and qubit (sigma-) baths.
///
/// For every eigenpair k > j inside the level cutoff and each bath chi:
///   Gamma = gamma_chi * (Delta_kj / omega_ref) * |C_jk|^2,
///   C_jk  = -i <j| chi - chi^dagger |k>,
/// with a downward jump |j><k| at Gamma (1 + nbar) and an upward jump |k><j|
/// at Gamma nbar.
inline DissipatorSet build_dissipators(const Spectrum& s, double gamma_a, double gamma_sigma,
                                       const BathOccupation& occupation, double omega_ref,
                                       int level_cutoff = kDefaultLevelCutoff) {
  if (gamma_a < 0.0 || gamma_sigma < 0.0) throw Error("damping rates must be non-negative");
  if (!(omega_ref > 0.0)) throw Error("reference frequency must be positive");
  const int dim = s.size();
  if (dim % kQubitDim != 0) throw DimensionMismatch("spectrum is not a qubit (x) cavity space");
  const int m = dim / kQubitDim;
  const int levels = std::min(level_cutoff, dim);

  std::vector<DissipationChannel> channels;
  const JointOperators ops(m);
  const std::array<std::pair<Bath, double>, 2> baths{{{Bath::cavity, gamma_a}, {Bath::qubit, gamma_sigma}}};
  for (const auto& [bath, gamma] : baths) {
    if (gamma == 0.0) continue;
    const ComplexMatrix& chi = bath == Bath::cavity ? ops.a : ops.sigma_minus;
    const ComplexMatrix coupling = s.to_eigenbasis(chi - chi.adjoint());
    for (int j = 0; j < levels; ++j) {
      for (int k = j + 1; k < levels; ++k) {
        const double delta = s.energies(k) - s.energies(j);
        if (!(delta > 0.0)) continue;
        const double base = gamma * (delta / omega_ref) * std::norm(coupling(j, k));
        const double nbar = occupation.at(delta);
        const double down = base * (1.0 + nbar);
        const double up = base * nbar;
        if (down >= kMinChannelRate) channels.push_back({down, j, k, bath, false});
        if (up >= kMinChannelRate) channels.push_back({up, k, j, bath, true});
      }
    }
  }
  return DissipatorSet(s.states, std::move(channels));
}

inline DissipatorSet build_dissipators(const Spectrum& s, double gamma_a, double gamma_sigma, double nbar,
                                       double omega_ref, int level_cutoff = kDefaultLevelCutoff) {
  return build_dissipators(s, gamma_a, gamma_sigma, BathOccupation::fixed(nbar), omega_ref, level_cutoff);
}

/// drho/dt = i[rho, H] + sum_c rate_c D[O_c] rho,
/// D[O] rho = O rho O^dagger - (rho O^dagger O + O^dagger O rho) / 2.
inline ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h, const DissipatorSet& dissipators) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols()) throw DimensionMismatch("state and Hamiltonian differ in size");
  const Complex i(0.0, 1.0);
  ComplexMatrix out = i * (rho * h - h * rho);
  if (dissipators.empty()) return out;
  if (dissipators.dim() != rho.rows()) throw DimensionMismatch("dissipators do not match the state");

  // All jumps are |u_to><u_from| in one orthonormal basis U, so
  //   sum_c r_c O rho O^dagger = U diag(R p) U^dagger,  p_k = <u_k|rho|u_k>,
  //   sum_c r_c O^dagger O     = U diag(lambda) U^dagger, lambda_k = sum_j R(j, k).
  const ComplexMatrix& u = dissipators.basis();
  const RealMatrix rates = dissipators.transition_rates();
  const ComplexMatrix rho_e = u.adjoint() * rho * u;
  const RealVector populations = rho_e.diagonal().real();
  const RealVector gains = rates * populations;
  const RealVector loss = rates.colwise().sum().transpose();

  ComplexMatrix gain_op = u * gains.cast<Complex>().asDiagonal() * u.adjoint();
  ComplexMatrix loss_op = u * loss.cast<Complex>().asDiagonal() * u.adjoint();
  out += gain_op - 0.5 * (rho * loss_op + loss_op * rho);
  return out;
}

inline ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const ComplexMatrix& h, const DissipatorSet& dissipators) {
  return lindblad_rhs(rho.matrix(), h, dissipators);
}

/// One classical fourth-order Runge-Kutta step of y' = f(y).
template <class State, class Rhs>
State rk4_step(const Rhs& f, const State& y, double h) {
  const State k1 = f(y);
  const State k2 = f(State(y + (0.5 * h) * k1));
  const State k3 = f(State(y + (0.5 * h) * k2));
  const State k4 = f(State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Liouvillian of a constant Hamiltonian, expressed in its own eigenbasis.
class DressedGenerator {
 public:
  DressedGenerator(RealVector energies, const DissipatorSet& dissipators) : energies_(std::move(energies)) {
    const auto n = energies_.size();
    rates_ = dissipators.empty() ? RealMatrix::Zero(n, n) : dissipators.transition_rates();
    loss_ = rates_.colwise().sum().transpose();
  }

  [[nodiscard]] int dim() const { return static_cast<int>(energies_.size()); }

  /// Rate of rho_ab for a != b: -i (E_a - E_b) - (lambda_a + lambda_b) / 2.
  [[nodiscard]] Complex coherence_rate(int a, int b) const {
    return Complex(-0.5 * (loss_(a) + loss_(b)), -(energies_(a) - energies_(b)));
  }

  /// Population rate matrix W with dp/dt = W p.
  [[nodiscard]] RealMatrix population_generator() const {
    RealMatrix w = rates_;
    w.diagonal() -= loss_;
    return w;
  }

  [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho_e) const {
    const int n = dim();
    ComplexMatrix out(n, n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) out(a, b) = coherence_rate(a, b) * rho_e(a, b);
    out.diagonal() += (rates_ * rho_e.diagonal().real()).cast<Complex>();
    return out;
  }

 private:
  RealVector energies_;
  RealMatrix rates_;
  RealVector loss_;
};

namespace detail {

// Stability polynomial of classical RK4: 1 + z + z^2/2 + z^3/6 + z^4/24.
template <class T>
T rk4_polynomial(const T& z, const T& one) {
  const T z2 = z * z;
  const T z3 = z2 * z;
  const T z4 = z3 * z;
  return T(one + z + z2 / 2.0 + z3 / 6.0 + z4 / 24.0);
}

inline Complex int_power(Complex base, int exponent) {
  Complex result(1.0, 0.0);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

inline RealMatrix int_power(RealMatrix base, int exponent) {
  RealMatrix result = RealMatrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1) result = (result * base).eval();
    exponent >>= 1;
    if (exponent > 0) base = (base * base).eval();
  }
  return result;
}

}  // namespace detail

/// The linear map produced by `steps` RK4 steps of size dt under a
/// DressedGenerator, precomputed once and applied in O(N^2).
class SegmentMap {
 public:
  SegmentMap(const DressedGenerator& gen, double dt, int steps) {
    const int n = gen.dim();
    coherence_ = ComplexMatrix(n, n);
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) {
        const Complex z = dt * gen.coherence_rate(a, b);
        coherence_(a, b) = detail::int_power(detail::rk4_polynomial(z, Complex(1.0)), steps);
      }
    }
    const RealMatrix w = dt * gen.population_generator();
    const RealMatrix single = detail::rk4_polynomial<RealMatrix>(w, RealMatrix::Identity(n, n));
    populations_ = detail::int_power(single, steps);
  }

  [[nodiscard]] ComplexMatrix apply(const ComplexMatrix& rho_e) const {
    ComplexMatrix out = coherence_.cwiseProduct(rho_e);
    out.diagonal() = populations_.cast<Complex>() * rho_e.diagonal();
    return out;
  }

 private:
  ComplexMatrix coherence_;
  RealMatrix populations_;
};

/// Dissipation settings shared by every segment of a run.
struct DissipationParams {
  double gamma_a = 0.01;
  double gamma_sigma = 0.01;
  BathOccupation occupation = BathOccupation::fixed(0.0);
  /// Frequency scale in the rate formula; delta_c in natural units.
  double omega_ref = 1.0;
  int level_cutoff = kDefaultLevelCutoff;
};

inline constexpr int kSegments = 30;
inline constexpr double kTotalTime = 1.0;
inline constexpr double kSegmentDuration = kTotalTime / kSegments;
inline constexpr double kDefaultDt = 1.0 / 3000.0;
inline constexpr std::array<double, 3> kActionFractions{0.0, 0.5, 1.0};

/// Thirty square pulses with amplitudes from {0, Omega_max/2, Omega_max}.
class PulseSequence {
 public:
  using Levels = std::array<int, kSegments>;

  PulseSequence(double omega_max, Levels levels) : omega_max_(omega_max), levels_(levels) {
    for (int a : levels_) {
      if (a < 0 || a >= static_cast<int>(kActionFractions.size())) throw InvalidIndex("pulse level must be 0, 1 or 2");
    }
  }

  static PulseSequence constant(double omega_max, int level = 2) {
    Levels levels;
    levels.fill(level);
    return {omega_max, levels};
  }

  [[nodiscard]] double omega_max() const { return omega_max_; }
  [[nodiscard]] const Levels& levels() const { return levels_; }
  [[nodiscard]] double amplitude(int segment) const { return omega_max_ * kActionFractions.at(levels_.at(segment)); }

  [[nodiscard]] std::vector<double> amplitudes() const {
    std::vector<double> out(kSegments);
    for (int s = 0; s < kSegments; ++s) out[s] = amplitude(s);
    return out;
  }

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;

 private:
  double omega_max_;
  Levels levels_;
};

/// Checkpoints of a propagation, one per segment boundary.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> witness;
  std::vector<ObservationVector> observations;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  std::optional<DensityMatrix> final_state;

  [[nodiscard]] double time_averaged_witness() const {
    if (witness.empty()) return 0.0;
    double s = 0.0;
    for (double v : witness) s += v;
    return s / static_cast<double>(witness.size());
  }
};

/// Cheap health check run at every checkpoint.
struct StateCheck {
  double trace_drift;
  double min_eigenvalue;
};

inline StateCheck check_state(const DensityMatrix& rho, double tolerance = 1e-6) {
  const StateCheck c{rho.trace_deviation(), rho.min_eigenvalue()};
  if (!(c.trace_drift <= tolerance) || !(c.min_eigenvalue >= -tolerance)) {
    throw IntegrationDiverged("state left the physical set: trace drift " + std::to_string(c.trace_drift) +
                              ", min eigenvalue " + std::to_string(c.min_eigenvalue));
  }
  return c;
}

/// Qubit-cavity system under a switchable drive amplitude. The spectrum,
/// dissipators and RK4 segment map are built on first use of each
/// (amplitude, duration) pair and reused afterwards.
class DrivenSystem {
 public:
  struct Segment {
    Spectrum spectrum;
    DissipatorSet dissipators;
    SegmentMap map;
  };

  DrivenSystem(const ModelParams& params, DissipationParams dissipation, double dt = kDefaultDt)
      : params_(params), dissipation_(std::move(dissipation)), dt_(dt), terms_(hamiltonian_terms(params)) {
    if (!(dt_ > 0.0)) throw Error("time step must be positive");
  }

  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const DissipationParams& dissipation() const { return dissipation_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] const HamiltonianTerms& terms() const { return terms_; }

  [[nodiscard]] int steps_for(double duration) const {
    const double ratio = duration / dt_;
    const int steps = static_cast<int>(std::llround(ratio));
    if (steps < 1 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
      throw Error("time step must divide the segment duration");
    }
    return steps;
  }

  const Segment& segment(double amplitude, double duration = kSegmentDuration) {
    const auto key = std::make_pair(amplitude, duration);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    const int steps = steps_for(duration);
    Spectrum spectrum = eigendecompose(terms_.at(amplitude));
    DissipatorSet dissipators = build_dissipators(spectrum, dissipation_.gamma_a, dissipation_.gamma_sigma,
                                                  dissipation_.occupation, dissipation_.omega_ref,
                                                  dissipation_.level_cutoff);
    SegmentMap map(DressedGenerator(spectrum.energies, dissipators), dt_, steps);
    auto seg = std::make_unique<Segment>(Segment{std::move(spectrum), std::move(dissipators), std::move(map)});
    return *cache_.emplace(key, std::move(seg)).first->second;
  }

  /// Evolves rho through one constant-amplitude interval.
  DensityMatrix evolve(const DensityMatrix& rho, double amplitude, double duration = kSegmentDuration) {
    const Segment& seg = segment(amplitude, duration);
    const ComplexMatrix& u = seg.spectrum.states;
    ComplexMatrix rho_e = u.adjoint() * rho.matrix() * u;
    rho_e = seg.map.apply(rho_e);
    return DensityMatrix(u * rho_e * u.adjoint(), rho.cavity_dim());
  }

 private:
  ModelParams params_;
  DissipationParams dissipation_;
  double dt_;
  HamiltonianTerms terms_;
  std::map<std::pair<double, double>, std::unique_ptr<Segment>> cache_;
};

/// Runs a pulse sequence, sampling E^T and observations at the 31 segment
/// boundaries. Throws IntegrationDiverged if a checkpoint leaves the
/// physical set by more than 1e-6.
inline Trajectory propagate(const DensityMatrix& rho0, const PulseSequence& pulse, DrivenSystem& system,
                            const Observables& observables) {
  Trajectory traj;
  traj.times.reserve(kSegments + 1);
  traj.witness.reserve(kSegments + 1);
  traj.observations.reserve(kSegments + 1);

  DensityMatrix rho = rho0;
  auto record = [&](int k) {
    const StateCheck c = check_state(rho);
    traj.max_trace_drift = std::max(traj.max_trace_drift, c.trace_drift);
    traj.min_eigenvalue = k == 0 ? c.min_eigenvalue : std::min(traj.min_eigenvalue, c.min_eigenvalue);
    traj.times.push_back(k * kSegmentDuration);
    traj.witness.push_back(entanglement_witness(rho));
    traj.observations.push_back(observables.observe(rho));
  };
  record(0);
  for (int s = 0; s < kSegments; ++s) {
    rho = system.evolve(rho, pulse.amplitude(s));
    record(s + 1);
  }
  traj.final_state = std::move(rho);
  return traj;
}

/// Convenience entry point; on divergence halves dt and retries up to three times.
inline Trajectory propagate(const DensityMatrix& rho0, const PulseSequence& pulse, const ModelParams& params,
                            const DissipationParams& dissipation, double dt = kDefaultDt, int max_retries = 3) {
  const Observables observables(params.m_trunc);
  for (int attempt = 0;; ++attempt) {
    try {
      DrivenSystem system(params, dissipation, dt);
      return propagate(rho0, pulse, system, observables);
    } catch (const IntegrationDiverged&) {
      if (attempt >= max_retries) throw;
      dt /= 2.0;
    }
  }
}

/// CSV columns: time, E_T, then the six observation components.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "time,E_T,n,sigma_pm,x_sq,x,sx_sq,sx\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put(traj.times[k]);
    out << ',';
    put(traj.witness[k]);
    for (double v : traj.observations[k].values) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
}

}  // namespace rabiq
