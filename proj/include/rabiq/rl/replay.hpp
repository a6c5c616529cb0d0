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

#include <cstddef>
#include <random>
#include <vector>

#include "rabiq/errors.hpp"
#include "rabiq/measures.hpp"

namespace rabiq::rl {

struct Transition {
  ObservationVector state;
  int action = 0;
  double reward = 0.0;
  ObservationVector next_state;
  bool done = false;
};

/// Fixed-capacity ring buffer; once full, each insertion overwrites the oldest.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw Error("replay capacity must be positive");
    items_.reserve(capacity_);
  }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
    ++inserted_;
  }

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t total_inserted() const { return inserted_; }
  [[nodiscard]] const std::vector<Transition>& items() const { return items_; }

  /// Uniform draws with replacement.
  [[nodiscard]] std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const {
    if (items_.size() < batch) throw Error("replay buffer holds fewer transitions than the batch size");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out(batch);
    for (auto& p : out) p = &items_[pick(rng)];
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t inserted_ = 0;
  std::vector<Transition> items_;
};

}  // namespace rabiq::rl
