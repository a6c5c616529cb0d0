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
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rabiq/config.hpp"
#include "rabiq/experiment.hpp"

namespace rabiq {
namespace {

namespace fs = std::filesystem;

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count_fields(const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; }

TEST(Config, ParsesSectionsAndDefaults) {
  const ExperimentConfig cfg = parse(
      "[run]\nmode = train\nseed = 9\n[model]\ng = 0.3\nm_trunc = 40\n[dissipation]\nnbar = 0.1\n"
      "[train]\nomega_max = 0.25\ninitial = coherent_down\nn_seeds = 3\n[dynamics]\nomegas = 0, 0.1\n");
  EXPECT_EQ(cfg.mode, Mode::train);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_DOUBLE_EQ(cfg.model.g, 0.3);
  EXPECT_EQ(cfg.model.m_trunc, 40);
  EXPECT_DOUBLE_EQ(cfg.model.delta_c, 1.0);
  EXPECT_TRUE(cfg.dissipation.occupation.is_fixed());
  EXPECT_DOUBLE_EQ(cfg.dissipation.occupation.value(), 0.1);
  EXPECT_DOUBLE_EQ(cfg.train.omega_max, 0.25);
  EXPECT_EQ(cfg.train.initial, rl::InitialState::coherent_down);
  EXPECT_EQ(cfg.train.n_seeds, 3);
  EXPECT_EQ(cfg.train.dqn.epochs, 100);
  ASSERT_EQ(cfg.dynamics.omegas.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.dynamics.omegas[1], 0.1);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse("[model]\ngg = 1\n"), ConfigError);
  EXPECT_THROW(parse("[modle]\ng = 1\n"), ConfigError);
  EXPECT_THROW(parse("[model]\ng = abc\n"), ConfigError);
  EXPECT_THROW(parse("[model]\nm_trunc = 3.5\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nmode = plot\n"), ConfigError);
  EXPECT_THROW(parse("[dissipation]\nnbar = 0.1\ntemperature = 1\n"), ConfigError);
  EXPECT_THROW(parse("[dissipation]\nnbar = -1\n"), ConfigError);
  EXPECT_THROW(parse("[dynamics]\ninitial_states = ground, excited\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\ng_points = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse("[sweep]\nomega_min = 1\nomega_max = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse("[model]\nm_trunc = 1\n").validate(), ConfigError);
}

TEST(Config, HashTracksResultRelevantFields) {
  ExperimentConfig a = parse("[model]\ng = 0.3\n");
  ExperimentConfig b = parse("[model]\ng = 0.3\n");
  a.mode = b.mode = Mode::train;
  a.seed = b.seed = 1;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.model.g = 0.31;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

ExperimentConfig sweep_config(double g_min, double g_max, int g_points, double w_min, double w_max, int w_points) {
  ExperimentConfig cfg;
  cfg.mode = Mode::sweep_phase;
  cfg.sweep.g = {g_min, g_max, g_points};
  cfg.sweep.omega = {w_min, w_max, w_points};
  return cfg;
}

TEST(Sweep, DecoupledOrigin) {
  const auto cells = run_sweep(sweep_config(0, 0, 1, 0, 0, 1));
  ASSERT_EQ(cells.size(), 1u);
  const SweepCell& c = cells[0];
  EXPECT_NEAR(c.gap, 1.0, 1e-12);
  EXPECT_NEAR(c.witness, 0.0, 1e-12);
  EXPECT_NEAR(c.kl, 0.0, 1e-12);
  EXPECT_EQ(c.wigner_negativity, 0.0);
  EXPECT_TRUE(c.converged);
  EXPECT_TRUE(std::isnan(c.g2));
}

TEST(Sweep, UncoupledGapsMatchBogoliubov) {
  const auto cells = run_sweep(sweep_config(0, 0, 1, 0.0, 0.4, 5), 2);
  ASSERT_EQ(cells.size(), 5u);
  for (const auto& c : cells) {
    EXPECT_NEAR(c.gap, oracle::bogoliubov_gap(1.0, c.omega), 1e-6) << "omega " << c.omega;
  }
}

TEST(Sweep, BeyondCriticalDriveIsUnconverged) {
  const auto cells = run_sweep(sweep_config(0.3, 0.3, 1, 0.45, 0.55, 2));
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_TRUE(cells[0].converged);
  EXPECT_FALSE(cells[1].converged);
  EXPECT_DOUBLE_EQ(cells[1].omega, 0.55);
  EXPECT_TRUE(std::isfinite(cells[1].kl));
}

TEST(Sweep, RowsSortedAndCsvDeterministic) {
  ExperimentConfig cfg = sweep_config(0.0, 0.2, 2, 0.0, 0.2, 3);
  cfg.model.m_trunc = 20;
  cfg.sweep.wigner_points = 10;
  const auto serial = run_sweep(cfg, 1);
  const auto threaded = run_sweep(cfg, 3);
  for (std::size_t i = 1; i < serial.size(); ++i) {
    const bool ordered = serial[i - 1].g < serial[i].g ||
                         (serial[i - 1].g == serial[i].g && serial[i - 1].omega < serial[i].omega);
    EXPECT_TRUE(ordered);
  }
  std::ostringstream a, b;
  write_sweep_csv(a, serial, config_hash(cfg));
  write_sweep_csv(b, threaded, config_hash(cfg));
  EXPECT_EQ(a.str(), b.str());
  const auto lines = lines_of(a.str());
  ASSERT_EQ(lines.size(), 2u + serial.size());
  EXPECT_EQ(lines[0].rfind("# config_hash=" + config_hash(cfg) + " version=", 0), 0u);
  EXPECT_EQ(lines[1], "g,omega,gap,kl,E_T,g2,g2_bare,S_W,converged");
  EXPECT_NE(lines[2].find("NaN"), std::string::npos);
}

TEST(Sweep, FailedCellKeepsItsRowWithNaN) {
  SweepCell failed;
  failed.g = 0.1;
  failed.omega = 0.2;
  failed.error = "boom";
  std::ostringstream out;
  write_sweep_csv(out, {failed}, "0");
  EXPECT_EQ(lines_of(out.str()).back(), "0.1,0.2,NaN,NaN,NaN,NaN,NaN,NaN,false");
}

ExperimentConfig scan_config() {
  ExperimentConfig cfg;
  cfg.mode = Mode::dynamics_scan;
  cfg.model.g = 0.3;
  return cfg;
}

TEST(DynamicsScan, UndrivenGroundStateWithoutLossIsFrozen) {
  ExperimentConfig cfg = scan_config();
  cfg.dissipation.gamma_a = cfg.dissipation.gamma_sigma = 0.0;
  cfg.dynamics.omegas = {0.0};
  cfg.dynamics.initial_states = {rl::InitialState::hamiltonian_ground};
  const auto runs = run_dynamics_scan(cfg);
  ASSERT_TRUE(runs[0].trajectory.has_value());
  for (double w : runs[0].trajectory->witness) EXPECT_NEAR(w, runs[0].trajectory->witness[0], 1e-10);
}

TEST(DynamicsScan, GroundFamilyDecreasesWithDrive) {
  ExperimentConfig cfg = scan_config();
  cfg.dynamics.initial_states = {rl::InitialState::hamiltonian_ground};
  const auto runs = run_dynamics_scan(cfg, 2);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_GT(runs[0].time_averaged_witness(), runs[1].time_averaged_witness());
  EXPECT_GT(runs[1].time_averaged_witness(), runs[2].time_averaged_witness());
}

TEST(DynamicsScan, CoherentProductStartsUnentangled) {
  ExperimentConfig cfg = scan_config();
  cfg.dynamics.omegas = {0.0};
  cfg.dynamics.initial_states = {rl::InitialState::coherent_down};
  const auto runs = run_dynamics_scan(cfg);
  ASSERT_TRUE(runs[0].trajectory.has_value());
  EXPECT_EQ(runs[0].trajectory->witness[0], 0.0);
}

TEST(DynamicsScan, FailuresSurfacePerRow) {
  ExperimentConfig cfg = scan_config();
  cfg.dt = 0.007;
  cfg.dynamics.omegas = {0.0};
  cfg.dynamics.initial_states = {rl::InitialState::coherent_down};
  const auto runs = run_dynamics_scan(cfg);
  EXPECT_FALSE(runs[0].error.empty());
  std::ostringstream out;
  write_dynamics_csv(out, runs, "0");
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 2u + kSegments + 1);
  EXPECT_EQ(lines.back().substr(lines.back().size() - 7), ",failed");
}

TEST(Campaign, SmokeSchema) {
  ExperimentConfig cfg = scan_config();
  cfg.mode = Mode::train;
  cfg.seed = 3;
  cfg.train.n_seeds = 2;
  cfg.train.dqn.epochs = 2;
  cfg.train.dqn.greedy_eval_epochs = 1;
  const CampaignResult c = run_training_campaign(cfg, 2);
  EXPECT_EQ(c.successful, 2);
  EXPECT_TRUE(c.aggregated);
  std::ostringstream out;
  write_aggregate_csv(out, c, config_hash(cfg));
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 2u + 31u);
  EXPECT_EQ(lines[1], "t,mean,std,baseline_mean,n_seeds");
  for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(count_fields(lines[i]), 5u);
  for (const auto& s : c.seeds) {
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s.best_trajectory->witness, s.result->best().signal);
  }
  EXPECT_EQ(c.seeds[0].seed, 3u);
  EXPECT_EQ(c.seeds[1].seed, 4u);
}

TEST(Campaign, NeedsSeed) {
  ExperimentConfig cfg = scan_config();
  cfg.mode = Mode::train;
  EXPECT_THROW((void)run_training_campaign(cfg), ConfigError);
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(5, 2, [](std::size_t i) { if (i == 3) throw Error("x"); }), Error);
}

// Command-line checks: run the built binary.

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* path = std::getenv("RABIQ_CLI");
    if (!path) GTEST_SKIP() << "RABIQ_CLI not set";
    cli_ = path;
    dir_ = fs::temp_directory_path() / ("rabiq_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& args) {
    const std::string cmd = "\"" + cli_ + "\" " + args + " > \"" + (dir_ / "stdout.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string cli_;
  fs::path dir_;
};

constexpr const char* kSmallSweep =
    "[model]\nm_trunc = 20\n[sweep]\ng_min = 0\ng_max = 0.2\ng_points = 2\n"
    "omega_min = 0\nomega_max = 0.2\nomega_points = 2\nwigner_points = 10\n";

TEST_F(Cli, SweepIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path cfg = write("sweep.ini", kSmallSweep);
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + (dir_ / "a").string() + " --threads 1"), 0);
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + (dir_ / "b").string() + " --threads 3"), 0);
  const std::string a = slurp(dir_ / "a" / "sweep.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "sweep.csv"));
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  const fs::path bad = write("bad.ini", "[model]\nunknown = 1\n");
  EXPECT_EQ(run("sweep --config " + bad.string() + " --out " + dir_.string()), 2);
  const fs::path mismatched = write("mode.ini", "[run]\nmode = train\n");
  EXPECT_EQ(run("sweep --config " + mismatched.string() + " --out " + dir_.string()), 2);
  const fs::path unseeded = write("train.ini", "[train]\nn_seeds = 1\n");
  EXPECT_EQ(run("train --config " + unseeded.string() + " --out " + dir_.string()), 2);
  EXPECT_EQ(run("sweep --config " + (dir_ / "missing.ini").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, PartialFailureExitsWithThree) {
  const fs::path cfg = write("dyn.ini", "[dissipation]\ndt = 0.007\n[dynamics]\nomegas = 0\ninitial_states = ground\n");
  EXPECT_EQ(run("dynamics --config " + cfg.string() + " --out " + dir_.string()), 3);
  EXPECT_TRUE(fs::exists(dir_ / "dynamics.csv"));
}

TEST_F(Cli, TrainThenReplayReproducesBestSequence) {
  const fs::path cfg = write("train.ini",
                             "[model]\ng = 0.3\n[train]\nn_seeds = 1\nepochs = 2\ngreedy_eval_epochs = 0\n");
  const fs::path out = dir_ / "train";
  ASSERT_EQ(run("train --config " + cfg.string() + " --out " + out.string() + " --seed 5"), 0);
  for (const char* f : {"aggregate.csv", "seeds.csv", "seed_5.jsonl", "best_seed_5.txt"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const fs::path replay = write("replay.ini", "[model]\ng = 0.3\n[replay]\nsequence = train/best_seed_5.txt\n");
  ASSERT_EQ(run("replay --config " + replay.string() + " --out " + (dir_ / "r").string()), 0);
  const auto replay_lines = lines_of(slurp(dir_ / "r" / "replay.csv"));
  const auto aggregate_lines = lines_of(slurp(out / "aggregate.csv"));
  ASSERT_EQ(replay_lines.size(), 33u);
  ASSERT_EQ(aggregate_lines.size(), 33u);
  // With one seed the aggregate mean is that seed's replayed E^T.
  for (std::size_t k = 2; k < 33; ++k) {
    const std::string e_t = replay_lines[k].substr(replay_lines[k].find(',') + 1);
    const std::string mean = aggregate_lines[k].substr(aggregate_lines[k].find(',') + 1);
    EXPECT_EQ(e_t.substr(0, e_t.find(',')), mean.substr(0, mean.find(',')));
  }
}

}  // namespace
}  // namespace rabiq
