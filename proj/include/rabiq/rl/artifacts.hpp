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

// Training log (JSON lines) and best-sequence artifact (plain text).
//
// Best-sequence format:
//   # omega_max=<value> config_hash=<16 hex digits>
//   a0 a1 ... a29          (each in {0, 1, 2})

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rabiq/errors.hpp"
#include "rabiq/lindblad.hpp"
#include "rabiq/rl/dqn.hpp"

namespace rabiq::rl {

inline void write_training_log(std::ostream& out, const TrainingResult& result) {
  for (const auto& rec : result.epochs) {
    nlohmann::json line;
    line["epoch"] = rec.epoch;
    line["return"] = rec.episode_return;
    const double avg = rec.time_averaged_signal();
    line["time_averaged_ET"] = (rec.diverged || std::isnan(avg)) ? nlohmann::json(nullptr) : nlohmann::json(avg);
    line["pulse_sequence"] = rec.actions;
    if (rec.diverged) line["diverged"] = true;
    out << line.dump() << '\n';
  }
}

struct SequenceArtifact {
  PulseSequence sequence;
  std::string config_hash;
};

inline void write_sequence(std::ostream& out, const PulseSequence& seq, const std::string& config_hash) {
  std::ostringstream header;
  header << std::setprecision(17) << "# omega_max=" << seq.omega_max() << " config_hash=" << config_hash;
  out << header.str() << '\n';
  for (int s = 0; s < kSegments; ++s) out << (s ? " " : "") << seq.levels()[s];
  out << '\n';
}

inline SequenceArtifact read_sequence(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) throw ConfigError("sequence file lacks a header line");
  double omega_max = 0.0;
  std::string hash;
  bool have_omega = false;
  std::istringstream fields(header.substr(2));
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "omega_max") {
      omega_max = std::stod(value);
      have_omega = true;
    } else if (key == "config_hash") {
      hash = value;
    }
  }
  if (!have_omega) throw ConfigError("sequence header lacks omega_max");
  PulseSequence::Levels levels;
  for (int s = 0; s < kSegments; ++s) {
    if (!(in >> levels[s])) throw ConfigError("sequence file must list 30 integer levels");
  }
  int extra;
  if (in >> extra) throw ConfigError("sequence file lists more than 30 levels");
  try {
    return {PulseSequence(omega_max, levels), hash};
  } catch (const InvalidIndex& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace rabiq::rl
