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

// Experiment drivers behind the command-line tool: phase sweeps, constant
// drive scans, multi-seed training campaigns and open-loop replay. Every
// runner returns plain data; the writers below turn it into CSV.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "rabiq/config.hpp"
#include "rabiq/errors.hpp"
#include "rabiq/lindblad.hpp"
#include "rabiq/measures.hpp"
#include "rabiq/rl/artifacts.hpp"
#include "rabiq/rl/dqn.hpp"
#include "rabiq/spectral.hpp"

namespace rabiq {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must
/// write only to their own slot; exceptions escaping a task are rethrown.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_hash_line(std::ostream& out, const std::string& hash) {
  out << "# config_hash=" << hash << " version=" << kVersion << '\n';
}

// ---------------------------------------------------------------- sweep

struct SweepCell {
  double g = 0.0;
  double omega = 0.0;
  double gap = kNaN;
  double kl = kNaN;
  double witness = kNaN;
  /// Dressed-operator correlation; NaN when the state has no population to lower.
  double g2 = kNaN;
  /// Bare-operator <a'a'aa>/<a'a>^2; NaN for an empty cavity.
  double g2_bare = kNaN;
  double wigner_negativity = kNaN;
  bool converged = false;
  /// Empty on success, else the reason the cell could not be evaluated.
  std::string error;
};

inline SweepCell evaluate_cell(const ExperimentConfig& cfg, double g, double omega) {
  SweepCell cell;
  cell.g = g;
  cell.omega = omega;
  try {
    ModelParams p = cfg.model;
    p.g = g;
    p.omega = omega;
    const Spectrum s = eigendecompose(p);
    cell.gap = energy_gap(s, 1);
    cell.kl = kl_convergence(p, cfg.sweep.kl_offset);
    const DensityMatrix rho = ground_state(s, p.m_trunc);
    cell.witness = entanglement_witness(rho);

    const JointOperators ops(p.m_trunc);
    try {
      cell.g2 = second_order_correlation(rho, dressed_operator(s, ops.cavity_quadrature()));
    } catch (const ZeroPopulation&) {
      cell.g2 = kNaN;
    }
    const double n = rho.expectation(ops.a_dag * ops.a).real();
    cell.g2_bare = n < 1e-12 ? kNaN : rho.expectation(ops.a_dag * ops.a_dag * ops.a * ops.a).real() / (n * n);

    GridSpec grid;
    grid.x_min = grid.p_min = -cfg.sweep.wigner_extent;
    grid.x_max = grid.p_max = cfg.sweep.wigner_extent;
    grid.n_x = grid.n_p = cfg.sweep.wigner_points;
    cell.wigner_negativity = wigner_negativity_average(wigner(reduce(rho, Subsystem::cavity), grid));
    cell.converged = cell.kl <= cfg.sweep.kl_threshold;
  } catch (const Error& e) {
    cell = SweepCell{};
    cell.g = g;
    cell.omega = omega;
    cell.error = e.what();
  }
  return cell;
}

/// Rows ordered by (g, omega).
inline std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg, int threads = 1) {
  const std::vector<double> gs = cfg.sweep.g.values();
  const std::vector<double> omegas = cfg.sweep.omega.values();
  std::vector<SweepCell> cells(gs.size() * omegas.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    cells[i] = evaluate_cell(cfg, gs[i / omegas.size()], omegas[i % omegas.size()]);
  });
  return cells;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells, const std::string& hash) {
  write_hash_line(out, hash);
  out << "g,omega,gap,kl,E_T,g2,g2_bare,S_W,converged\n";
  for (const auto& c : cells) {
    out << format_number(c.g) << ',' << format_number(c.omega) << ',' << format_number(c.gap) << ','
        << format_number(c.kl) << ',' << format_number(c.witness) << ',' << format_number(c.g2) << ','
        << format_number(c.g2_bare) << ',' << format_number(c.wigner_negativity) << ','
        << (c.converged ? "true" : "false") << '\n';
  }
}

// ------------------------------------------------------------- dynamics

struct ScanRun {
  double omega = 0.0;
  rl::InitialState initial = rl::InitialState::hamiltonian_ground;
  std::optional<Trajectory> trajectory;
  std::string error;

  [[nodiscard]] double time_averaged_witness() const {
    return trajectory ? trajectory->time_averaged_witness() : kNaN;
  }
};

/// Initial state for a scan run. "ground" means the ground state of the
/// Hamiltonian with the scan's own drive switched on.
inline DensityMatrix scan_initial_state(const ModelParams& driven, rl::InitialState initial) {
  if (initial == rl::InitialState::coherent_down) return coherent_product_state(1.0, QubitLevel::down, driven.m_trunc);
  return ground_state(driven);
}

inline std::vector<ScanRun> run_dynamics_scan(const ExperimentConfig& cfg, int threads = 1) {
  const auto& omegas = cfg.dynamics.omegas;
  const auto& states = cfg.dynamics.initial_states;
  std::vector<ScanRun> runs(omegas.size() * states.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    ScanRun& run = runs[i];
    run.omega = omegas[i / states.size()];
    run.initial = states[i % states.size()];
    try {
      ModelParams driven = cfg.model;
      driven.omega = run.omega;
      run.trajectory = propagate(scan_initial_state(driven, run.initial), PulseSequence::constant(run.omega, 2),
                                 cfg.model, cfg.dissipation, cfg.dt);
    } catch (const Error& e) {
      run.error = e.what();
    }
  });
  return runs;
}

inline void write_dynamics_csv(std::ostream& out, const std::vector<ScanRun>& runs, const std::string& hash) {
  write_hash_line(out, hash);
  out << "omega,initial,time,E_T,n,sigma_pm,x_sq,x,sx_sq,sx,status\n";
  for (const auto& r : runs) {
    for (int k = 0; k <= kSegments; ++k) {
      out << format_number(r.omega) << ',' << rl::to_string(r.initial) << ',' << format_number(k * kSegmentDuration);
      if (r.trajectory) {
        out << ',' << format_number(r.trajectory->witness[k]);
        for (double v : r.trajectory->observations[k].values) out << ',' << format_number(v);
        out << ",ok\n";
      } else {
        for (int c = 0; c < 7; ++c) out << ",NaN";
        out << ",failed\n";
      }
    }
  }
}

// ------------------------------------------------------------- training

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<rl::TrainingResult> result;
  /// Best sequence replayed open loop.
  std::optional<Trajectory> best_trajectory;
  /// Physicality bounds over every training step of the seed.
  double max_trace_drift = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  std::string error;

  [[nodiscard]] bool ok() const { return result.has_value() && best_trajectory.has_value(); }
};

struct CampaignResult {
  std::vector<SeedOutcome> seeds;
  /// Uncontrolled (all-zero) run from the same initial state.
  Trajectory baseline;
  std::vector<double> mean;
  std::vector<double> stddev;
  int successful = 0;
  bool aggregated = false;

  /// Time-averaged E^T of each successful seed's best sequence.
  [[nodiscard]] std::vector<double> controlled_averages() const {
    std::vector<double> out;
    for (const auto& s : seeds)
      if (s.ok()) out.push_back(s.best_trajectory->time_averaged_witness());
    return out;
  }
};

inline std::uint64_t campaign_seed(const ExperimentConfig& cfg, int index) {
  return cfg.seed.value_or(0) + static_cast<std::uint64_t>(index);
}

inline SeedOutcome run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  try {
    const rl::ControlConfig control = cfg.control(cfg.train.omega_max, cfg.train.initial);
    rl::ControlEnvironment env(control);
    rl::DqnConfig dqn = cfg.train.dqn;
    dqn.seed = seed;
    out.result = rl::train_round(env, dqn);
    out.max_trace_drift = env.max_trace_drift();
    out.min_eigenvalue = env.min_eigenvalue();
    if (!out.result->best_epoch) throw IntegrationDiverged("every epoch diverged");
    out.best_trajectory = rl::replay_best(rl::to_pulse(control.omega_max, out.result->best().actions), control);
  } catch (const Error& e) {
    out.best_trajectory.reset();
    out.error = e.what();
  }
  return out;
}

/// Seeds run in parallel; statistics need min(min_successful, n_seeds) successes.
inline CampaignResult run_training_campaign(const ExperimentConfig& cfg, int threads = 1) {
  if (!cfg.seed) throw ConfigError("train mode needs a seed ([run] seed or --seed)");
  CampaignResult campaign;
  campaign.seeds.resize(static_cast<std::size_t>(cfg.train.n_seeds));
  parallel_for(campaign.seeds.size(), threads, [&](std::size_t i) {
    campaign.seeds[i] = run_seed(cfg, campaign_seed(cfg, static_cast<int>(i)));
  });

  const rl::ControlConfig control = cfg.control(cfg.train.omega_max, cfg.train.initial);
  campaign.baseline = rl::replay_best(PulseSequence::constant(control.omega_max, 0), control);

  for (const auto& s : campaign.seeds) campaign.successful += s.ok() ? 1 : 0;
  const int required = std::min(cfg.train.min_successful, cfg.train.n_seeds);
  campaign.aggregated = campaign.successful >= required && campaign.successful > 0;
  if (!campaign.aggregated) return campaign;

  campaign.mean.assign(kSegments + 1, 0.0);
  campaign.stddev.assign(kSegments + 1, 0.0);
  const double n = campaign.successful;
  for (int k = 0; k <= kSegments; ++k) {
    double sum = 0.0;
    for (const auto& s : campaign.seeds)
      if (s.ok()) sum += s.best_trajectory->witness[k];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& s : campaign.seeds)
      if (s.ok()) sq += (s.best_trajectory->witness[k] - mean) * (s.best_trajectory->witness[k] - mean);
    campaign.mean[k] = mean;
    campaign.stddev[k] = campaign.successful > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  }
  return campaign;
}

/// Columns t, mean, std, baseline_mean, n_seeds; std is the sample deviation across seeds.
inline void write_aggregate_csv(std::ostream& out, const CampaignResult& c, const std::string& hash) {
  write_hash_line(out, hash);
  out << "t,mean,std,baseline_mean,n_seeds\n";
  for (int k = 0; k <= kSegments; ++k) {
    const bool have = c.aggregated;
    out << format_number(k * kSegmentDuration) << ',' << format_number(have ? c.mean[k] : kNaN) << ','
        << format_number(have ? c.stddev[k] : kNaN) << ',' << format_number(c.baseline.witness[k]) << ','
        << c.successful << '\n';
  }
}

/// One row per seed: best epoch, time-averaged E^T of the best and baseline
/// sequences, and greedy action-0 frequencies early and late in training.
inline void write_seed_summary_csv(std::ostream& out, const CampaignResult& c, const ExperimentConfig& cfg,
                                   const std::string& hash) {
  write_hash_line(out, hash);
  out << "seed,status,best_epoch,best_avg_E_T,baseline_avg_E_T,action0_early,action0_late\n";
  const int epochs = cfg.train.dqn.epochs;
  const int window = cfg.train.dqn.greedy_eval_epochs;
  for (const auto& s : c.seeds) {
    out << s.seed << ',' << (s.ok() ? "ok" : "failed") << ',';
    if (s.ok()) {
      out << *s.result->best_epoch << ',' << format_number(s.best_trajectory->time_averaged_witness()) << ','
          << format_number(c.baseline.time_averaged_witness()) << ','
          << format_number(s.result->greedy_action_frequency(0, 0, window)) << ','
          << format_number(s.result->greedy_action_frequency(0, epochs - window, epochs)) << '\n';
    } else {
      out << "NaN,NaN," << format_number(c.baseline.time_averaged_witness()) << ",NaN,NaN\n";
    }
  }
}

// --------------------------------------------------------------- replay

struct ReplayOutcome {
  rl::SequenceArtifact artifact;
  Trajectory trajectory;
};

inline ReplayOutcome run_replay(const ExperimentConfig& cfg) {
  if (cfg.replay.sequence.empty()) throw ConfigError("replay mode needs [replay] sequence");
  std::ifstream in(cfg.replay.sequence);
  if (!in) throw ConfigError("cannot open sequence file '" + cfg.replay.sequence + "'");
  ReplayOutcome out{rl::read_sequence(in), {}};
  const rl::ControlConfig control = cfg.control(out.artifact.sequence.omega_max(), cfg.replay.initial);
  out.trajectory = rl::replay_best(out.artifact.sequence, control);
  return out;
}

}  // namespace rabiq
