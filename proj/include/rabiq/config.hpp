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

// INI experiment configuration. Sections and keys:
//
//   [run]          mode, seed
//   [model]        delta_c, delta_q, g, omega, kerr, m_trunc
//   [dissipation]  gamma_a, gamma_sigma, nbar | temperature, omega_ref, level_cutoff, dt
//   [sweep]        g_min, g_max, g_points, omega_min, omega_max, omega_points,
//                  kl_offset, kl_threshold, wigner_points, wigner_extent
//   [dynamics]     omegas, initial_states
//   [train]        omega_max, initial, n_seeds, min_successful, epochs, batch_size,
//                  buffer_capacity, discount, target_sync, learning_rate,
//                  weight_decay, epsilon_end, epsilon_decay_epochs, greedy_eval_epochs
//   [replay]       sequence, initial
//
// Unknown sections or keys are rejected.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rabiq/errors.hpp"
#include "rabiq/fock.hpp"
#include "rabiq/lindblad.hpp"
#include "rabiq/rl/dqn.hpp"
#include "rabiq/rl/environment.hpp"

#ifndef RABIQ_VERSION
#define RABIQ_VERSION "0.0.0"
#endif

namespace rabiq {

inline constexpr const char* kVersion = RABIQ_VERSION;

enum class Mode { sweep_phase, dynamics_scan, train, replay };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::sweep_phase: return "sweep_phase";
    case Mode::dynamics_scan: return "dynamics_scan";
    case Mode::train: return "train";
    case Mode::replay: return "replay";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "sweep" || s == "sweep_phase") return Mode::sweep_phase;
  if (s == "dynamics" || s == "dynamics_scan") return Mode::dynamics_scan;
  if (s == "train") return Mode::train;
  if (s == "replay") return Mode::replay;
  throw ConfigError("unknown mode '" + s + "'");
}

/// Inclusive evenly spaced range; a single point sits at `min`.
struct Range {
  double min = 0.0;
  double max = 0.0;
  int points = 1;

  [[nodiscard]] double at(int i) const {
    return points == 1 ? min : min + (max - min) * static_cast<double>(i) / (points - 1);
  }
  [[nodiscard]] std::vector<double> values() const {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[i] = at(i);
    return out;
  }
};

struct SweepSettings {
  Range g{0.0, 0.5, 50};
  Range omega{0.0, 0.6, 50};
  int kl_offset = 1;
  double kl_threshold = 1e-2;
  int wigner_points = 100;
  double wigner_extent = 5.0;
};

struct DynamicsSettings {
  std::vector<double> omegas{0.0, 0.2, 0.4};
  std::vector<rl::InitialState> initial_states{rl::InitialState::hamiltonian_ground, rl::InitialState::coherent_down};
};

struct TrainSettings {
  double omega_max = 0.3;
  rl::InitialState initial = rl::InitialState::hamiltonian_ground;
  int n_seeds = 20;
  int min_successful = 15;
  rl::DqnConfig dqn;
};

struct ReplaySettings {
  std::string sequence;
  rl::InitialState initial = rl::InitialState::hamiltonian_ground;
};

struct ExperimentConfig {
  std::optional<Mode> mode;
  std::optional<std::uint64_t> seed;
  ModelParams model;
  DissipationParams dissipation;
  double dt = kDefaultDt;
  SweepSettings sweep;
  DynamicsSettings dynamics;
  TrainSettings train;
  ReplaySettings replay;

  void validate() const {
    try {
      model.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("[model] ") + e.what());
    }
    for (const Range* r : {&sweep.g, &sweep.omega}) {
      if (r->points < 1) throw ConfigError("[sweep] point counts must be >= 1");
      if (!(r->min <= r->max)) throw ConfigError("[sweep] ranges must satisfy min <= max");
    }
    if (sweep.kl_offset < 0) throw ConfigError("[sweep] kl_offset must be >= 0");
    if (sweep.wigner_points < 1) throw ConfigError("[sweep] wigner_points must be >= 1");
    if (dynamics.omegas.empty() || dynamics.initial_states.empty()) {
      throw ConfigError("[dynamics] omegas and initial_states must be nonempty");
    }
    if (!(dt > 0.0)) throw ConfigError("[dissipation] dt must be positive");
    if (dissipation.gamma_a < 0.0 || dissipation.gamma_sigma < 0.0) {
      throw ConfigError("[dissipation] rates must be non-negative");
    }
    if (train.n_seeds < 1) throw ConfigError("[train] n_seeds must be >= 1");
    if (train.dqn.epochs < 1) throw ConfigError("[train] epochs must be >= 1");
    if (train.dqn.batch_size < 1 || train.dqn.buffer_capacity < train.dqn.batch_size) {
      throw ConfigError("[train] buffer_capacity must be >= batch_size >= 1");
    }
    if (train.dqn.target_sync_interval < 1) throw ConfigError("[train] target_sync must be >= 1");
    if (train.dqn.epsilon_end < 0.0 || train.dqn.epsilon_end > 1.0) {
      throw ConfigError("[train] epsilon_end must lie in [0, 1]");
    }
  }

  [[nodiscard]] rl::ControlConfig control(double omega_max, rl::InitialState initial) const {
    rl::ControlConfig c;
    c.params = model;
    c.omega_max = omega_max;
    c.initial = initial;
    c.dissipation = dissipation;
    c.dt = dt;
    return c;
  }

  /// Canonical text of everything that affects results (not output paths or threads).
  [[nodiscard]] std::string canonical() const {
    std::ostringstream o;
    o.precision(17);
    o << "model " << model.delta_c << ' ' << model.delta_q << ' ' << model.g << ' ' << model.omega << ' ' << model.kerr
      << ' ' << model.m_trunc << '\n';
    o << "dissipation " << dissipation.gamma_a << ' ' << dissipation.gamma_sigma << ' '
      << (dissipation.occupation.is_fixed() ? "nbar " : "temperature ") << dissipation.occupation.value() << ' '
      << dissipation.omega_ref << ' ' << dissipation.level_cutoff << ' ' << dt << '\n';
    if (!mode) return o.str();
    o << "mode " << to_string(*mode) << '\n';
    switch (*mode) {
      case Mode::sweep_phase:
        o << "sweep " << sweep.g.min << ' ' << sweep.g.max << ' ' << sweep.g.points << ' ' << sweep.omega.min << ' '
          << sweep.omega.max << ' ' << sweep.omega.points << ' ' << sweep.kl_offset << ' ' << sweep.kl_threshold << ' '
          << sweep.wigner_points << ' ' << sweep.wigner_extent << '\n';
        break;
      case Mode::dynamics_scan:
        o << "dynamics";
        for (double w : dynamics.omegas) o << ' ' << w;
        for (auto s : dynamics.initial_states) o << ' ' << rl::to_string(s);
        o << '\n';
        break;
      case Mode::train: {
        const rl::DqnConfig& d = train.dqn;
        o << "train " << train.omega_max << ' ' << rl::to_string(train.initial) << ' ' << train.n_seeds << ' '
          << train.min_successful << ' ' << d.epochs << ' ' << d.batch_size << ' ' << d.buffer_capacity << ' '
          << d.discount << ' ' << d.target_sync_interval << ' ' << d.optimizer.learning_rate << ' '
          << d.optimizer.weight_decay << ' ' << d.epsilon_end << ' ' << d.epsilon_decay_epochs << ' '
          << d.greedy_eval_epochs << " seed " << seed.value_or(0) << '\n';
        break;
      }
      case Mode::replay:
        o << "replay " << replay.sequence << ' ' << rl::to_string(replay.initial) << '\n';
        break;
    }
    return o.str();
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical())));
  return buf;
}

namespace detail {

using boost::property_tree::ptree;

class SectionReader {
 public:
  SectionReader(const ptree& root, const std::string& name) : name_(name) {
    if (auto child = root.get_child_optional(name)) section_ = &*child;
  }
  template <class T>
  void get(const std::string& key, T& target) {
    seen_.insert(key);
    if (!section_) return;
    auto raw = section_->get_optional<std::string>(key);
    if (!raw) return;
    target = convert<T>(key, *raw);
  }

  [[nodiscard]] std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!section_) return std::nullopt;
    if (auto v = section_->get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }

  void reject_unknown() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (!seen_.count(key)) throw ConfigError("unknown key [" + name_ + "] " + key);
    }
  }

 private:
  template <class T>
  T convert(const std::string& key, const std::string& text) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      std::istringstream in(text);
      T value{};
      in >> value;
      bool ok = !in.fail();
      if (ok && !in.eof()) ok = (in >> std::ws).eof();
      if (!ok) throw ConfigError("bad value for [" + name_ + "] " + key + ": '" + text + "'");
      return value;
    }
  }

  std::string name_;
  const ptree* section_ = nullptr;
  std::set<std::string> seen_;
};

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty list element in '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  detail::ptree root;
  try {
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  static const std::set<std::string> sections{"run", "model", "dissipation", "sweep", "dynamics", "train", "replay"};
  for (const auto& [name, child] : root) {
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (child.empty() && !child.data().empty()) throw ConfigError("key '" + name + "' outside a section");
  }

  ExperimentConfig cfg;
  {
    detail::SectionReader r(root, "run");
    if (auto m = r.raw("mode")) cfg.mode = parse_mode(*m);
    std::uint64_t seed = 0;
    if (r.raw("seed")) {
      r.get("seed", seed);
      cfg.seed = seed;
    }
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "model");
    r.get("delta_c", cfg.model.delta_c);
    r.get("delta_q", cfg.model.delta_q);
    r.get("g", cfg.model.g);
    r.get("omega", cfg.model.omega);
    r.get("kerr", cfg.model.kerr);
    r.get("m_trunc", cfg.model.m_trunc);
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "dissipation");
    r.get("gamma_a", cfg.dissipation.gamma_a);
    r.get("gamma_sigma", cfg.dissipation.gamma_sigma);
    r.get("omega_ref", cfg.dissipation.omega_ref);
    r.get("level_cutoff", cfg.dissipation.level_cutoff);
    r.get("dt", cfg.dt);
    const auto nbar = r.raw("nbar");
    const auto temperature = r.raw("temperature");
    if (nbar && temperature) throw ConfigError("[dissipation] give either nbar or temperature, not both");
    try {
      if (nbar) cfg.dissipation.occupation = BathOccupation::fixed(detail::parse_double(*nbar));
      if (temperature) cfg.dissipation.occupation = BathOccupation::thermal(detail::parse_double(*temperature));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("[dissipation] ") + e.what());
    }
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "sweep");
    r.get("g_min", cfg.sweep.g.min);
    r.get("g_max", cfg.sweep.g.max);
    r.get("g_points", cfg.sweep.g.points);
    r.get("omega_min", cfg.sweep.omega.min);
    r.get("omega_max", cfg.sweep.omega.max);
    r.get("omega_points", cfg.sweep.omega.points);
    r.get("kl_offset", cfg.sweep.kl_offset);
    r.get("kl_threshold", cfg.sweep.kl_threshold);
    r.get("wigner_points", cfg.sweep.wigner_points);
    r.get("wigner_extent", cfg.sweep.wigner_extent);
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "dynamics");
    if (auto list = r.raw("omegas")) {
      cfg.dynamics.omegas.clear();
      for (const auto& s : detail::split_list(*list)) cfg.dynamics.omegas.push_back(detail::parse_double(s));
    }
    if (auto list = r.raw("initial_states")) {
      cfg.dynamics.initial_states.clear();
      for (const auto& s : detail::split_list(*list)) cfg.dynamics.initial_states.push_back(rl::parse_initial_state(s));
    }
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "train");
    rl::DqnConfig& d = cfg.train.dqn;
    r.get("omega_max", cfg.train.omega_max);
    if (auto s = r.raw("initial")) cfg.train.initial = rl::parse_initial_state(*s);
    r.get("n_seeds", cfg.train.n_seeds);
    r.get("min_successful", cfg.train.min_successful);
    r.get("epochs", d.epochs);
    r.get("batch_size", d.batch_size);
    r.get("buffer_capacity", d.buffer_capacity);
    r.get("discount", d.discount);
    r.get("target_sync", d.target_sync_interval);
    r.get("learning_rate", d.optimizer.learning_rate);
    r.get("weight_decay", d.optimizer.weight_decay);
    r.get("epsilon_end", d.epsilon_end);
    r.get("epsilon_decay_epochs", d.epsilon_decay_epochs);
    r.get("greedy_eval_epochs", d.greedy_eval_epochs);
    r.reject_unknown();
  }
  {
    detail::SectionReader r(root, "replay");
    r.get("sequence", cfg.replay.sequence);
    if (auto s = r.raw("initial")) cfg.replay.initial = rl::parse_initial_state(*s);
    r.reject_unknown();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig cfg = parse_config(in);
  // Relative sequence paths are taken relative to the config file.
  if (!cfg.replay.sequence.empty()) {
    const std::filesystem::path seq(cfg.replay.sequence);
    if (seq.is_relative()) cfg.replay.sequence = (std::filesystem::path(path).parent_path() / seq).string();
  }
  return cfg;
}

}  // namespace rabiq
