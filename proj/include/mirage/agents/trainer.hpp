// Copyright 2026 The Mirage Authors
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

#ifndef MIRAGE_AGENTS_TRAINER_HPP_
#define MIRAGE_AGENTS_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/agents/policy.hpp"

namespace mirage::agents {

struct TaskStep {
  Vec observation;
  double reward = 0.0;
  bool done = false;
  // Episode cut by a time limit rather than a terminal state; the learner
  // bootstraps from the value of `observation`.
  bool truncated = false;
};

// An episodic decision problem from the learner's point of view. The victim's
// environment and the adversary's induced MDP both implement this.
class EpisodicTask {
 public:
  virtual ~EpisodicTask() = default;
  virtual int ObservationDim() const = 0;
  virtual envs::ActionSpace ActionSpace() const = 0;
  virtual Vec Reset(Rng& rng) = 0;
  virtual TaskStep Step(const envs::Action& action, Rng& rng) = 0;
};

struct TrainConfig {
  long total_steps = 100000;
  int rollout_steps = 2048;
  double learning_rate = 3e-4;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.0;
  int epochs = 10;
  int minibatch_size = 64;
  double clip_ratio = 0.2;
  double max_grad_norm = 0.5;
  bool anneal_learning_rate = true;
  std::vector<int> value_hidden = {64, 64};
  std::uint64_t seed = 0;

  void Validate() const;
};

nlohmann::json ToJson(const TrainConfig& c);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct IterationStats {
  int iteration = 0;
  long steps = 0;
  int episodes = 0;
  double mean_return = 0.0;  // over episodes completed in this rollout
};

struct TrainingLog {
  std::vector<IterationStats> iterations;
  long steps = 0;
};

// Return false from the callback to stop training early.
using IterationCallback = std::function<bool(const IterationStats&, const Policy&)>;

// Clipped-ratio actor-critic with generalised advantage estimation.
TrainingLog TrainPolicy(EpisodicTask& task, Policy& policy, const TrainConfig& config,
                        const IterationCallback& callback = {});

}  // namespace mirage::agents

#endif  // MIRAGE_AGENTS_TRAINER_HPP_
