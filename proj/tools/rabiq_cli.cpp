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


// rabiq: command-line front end.
//
//   rabiq sweep    --config PATH [--out DIR] [--threads N]
//   rabiq dynamics --config PATH [--out DIR] [--threads N]
//   rabiq train    --config PATH [--out DIR] [--seed N] [--threads N]
//   rabiq replay   --config PATH [--out DIR]
//
// Exit status: 0 success, 2 configuration error, 3 partial failure, 1 other errors.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rabiq/config.hpp"
#include "rabiq/experiment.hpp"
#include "rabiq/rl/artifacts.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw rabiq::Error("cannot write '" + path.string() + "'");
  return f;
}

rabiq::ExperimentConfig prepare(const Options& opt, rabiq::Mode mode) {
  rabiq::ExperimentConfig cfg = rabiq::load_config(opt.config);
  if (cfg.mode && *cfg.mode != mode) {
    throw rabiq::ConfigError("config declares mode " + rabiq::to_string(*cfg.mode) + " but the subcommand runs " +
                             rabiq::to_string(mode));
  }
  cfg.mode = mode;
  if (opt.seed) cfg.seed = opt.seed;
  cfg.validate();
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) throw rabiq::Error("cannot create output directory '" + opt.out + "': " + ec.message());
  return cfg;
}

int run_sweep(const Options& opt) {
  const auto cfg = prepare(opt, rabiq::Mode::sweep_phase);
  const auto cells = rabiq::run_sweep(cfg, opt.threads);
  auto f = open_output(fs::path(opt.out) / "sweep.csv");
  rabiq::write_sweep_csv(f, cells, rabiq::config_hash(cfg));
  int failed = 0;
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      ++failed;
      std::cerr << "cell g=" << c.g << " omega=" << c.omega << " failed: " << c.error << '\n';
    }
  }
  std::cout << "wrote " << cells.size() << " cells to " << (fs::path(opt.out) / "sweep.csv").string() << '\n';
  return failed ? kExitPartial : kExitOk;
}

int run_dynamics(const Options& opt) {
  const auto cfg = prepare(opt, rabiq::Mode::dynamics_scan);
  const auto runs = rabiq::run_dynamics_scan(cfg, opt.threads);
  auto f = open_output(fs::path(opt.out) / "dynamics.csv");
  rabiq::write_dynamics_csv(f, runs, rabiq::config_hash(cfg));
  int failed = 0;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "omega=" << r.omega << " " << rabiq::rl::to_string(r.initial) << " failed: " << r.error << '\n';
    }
  }
  std::cout << "wrote " << runs.size() << " runs to " << (fs::path(opt.out) / "dynamics.csv").string() << '\n';
  return failed ? kExitPartial : kExitOk;
}

int run_train(const Options& opt) {
  const auto cfg = prepare(opt, rabiq::Mode::train);
  const std::string hash = rabiq::config_hash(cfg);
  const auto campaign = rabiq::run_training_campaign(cfg, opt.threads);
  const fs::path out(opt.out);
  for (const auto& s : campaign.seeds) {
    const std::string tag = std::to_string(s.seed);
    if (s.result) {
      auto log = open_output(out / ("seed_" + tag + ".jsonl"));
      rabiq::rl::write_training_log(log, *s.result);
      for (const auto& line : s.result->log) std::cerr << "seed " << tag << ": " << line << '\n';
    }
    if (s.ok()) {
      auto seq = open_output(out / ("best_seed_" + tag + ".txt"));
      rabiq::rl::write_sequence(seq, rabiq::rl::to_pulse(cfg.train.omega_max, s.result->best().actions), hash);
    } else {
      std::cerr << "seed " << tag << " failed: " << s.error << '\n';
    }
  }
  {
    auto f = open_output(out / "aggregate.csv");
    rabiq::write_aggregate_csv(f, campaign, hash);
  }
  {
    auto f = open_output(out / "seeds.csv");
    rabiq::write_seed_summary_csv(f, campaign, cfg, hash);
  }
  std::cout << campaign.successful << "/" << campaign.seeds.size() << " seeds succeeded; results in " << out.string()
            << '\n';
  if (!campaign.aggregated) {
    std::cerr << "too few successful seeds to aggregate\n";
    return kExitPartial;
  }
  return campaign.successful == static_cast<int>(campaign.seeds.size()) ? kExitOk : kExitPartial;
}

int run_replay(const Options& opt) {
  const auto cfg = prepare(opt, rabiq::Mode::replay);
  const auto outcome = rabiq::run_replay(cfg);
  auto f = open_output(fs::path(opt.out) / "replay.csv");
  f << "# config_hash=" << outcome.artifact.config_hash << " version=" << rabiq::kVersion << '\n';
  rabiq::write_trajectory_csv(f, outcome.trajectory);
  std::cout << "time-averaged E_T " << rabiq::format_number(outcome.trajectory.time_averaged_witness()) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven quantum Rabi model toolkit"};
  app.set_version_flag("--version", std::string(rabiq::kVersion));
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", opt.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    if (with_seed) sub->add_option("--seed", opt.seed, "base seed, overrides the config file");
  };
  CLI::App* sweep = app.add_subcommand("sweep", "ground-state diagnostics over a (g, omega) grid");
  CLI::App* dynamics = app.add_subcommand("dynamics", "constant-drive dissipative dynamics");
  CLI::App* train = app.add_subcommand("train", "multi-seed reinforcement-learning campaign");
  CLI::App* replay = app.add_subcommand("replay", "open-loop replay of a stored pulse sequence");
  add_common(sweep, true);
  add_common(dynamics, true);
  add_common(train, true);
  add_common(replay, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sweep) return run_sweep(opt);
    if (*dynamics) return run_dynamics(opt);
    if (*train) return run_train(opt);
    if (*replay) return run_replay(opt);
  } catch (const rabiq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
