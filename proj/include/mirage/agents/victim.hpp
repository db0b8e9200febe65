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

#ifndef MIRAGE_AGENTS_VICTIM_HPP_
#define MIRAGE_AGENTS_VICTIM_HPP_

#include <string>

#include "mirage/agents/evaluation.hpp"
#include "mirage/agents/trainer.hpp"

namespace mirage::agents {

// The victim's view of an unattacked environment: normalised observations.
class VictimTask final : public EpisodicTask {
 public:
  explicit VictimTask(const envs::Environment& env) : env_(env) {}
  int ObservationDim() const override { return env_.spec().state_dim; }
  envs::ActionSpace ActionSpace() const override { return env_.spec().action_space; }
  Vec Reset(Rng& rng) override;
  TaskStep Step(const envs::Action& action, Rng& rng) override;

 private:
  const envs::Environment& env_;
  Vec state_;
  int t_ = 0;
};

struct CompetenceThreshold {
  double min_mean_return = 0.0;
  int episodes = 200;
};

CompetenceThreshold DefaultCompetence(const std::string& env_name);
PolicyDescriptor DefaultVictimDescriptor(const envs::Environment& env);
TrainConfig DefaultVictimConfig(const std::string& env_name);

struct VictimReport {
  double evaluation_mean = 0.0;
  double evaluation_stddev = 0.0;
  long steps = 0;
  bool competent = false;
};

// Expected return of the greedy tabular victim on the one-step MDP, by
// enumeration over initial states.
double ExactOneStepReturn(const Policy& victim);

// Trains until the competence threshold is met (checked after every rollout
// batch once the running return looks promising) or the step budget runs
// out, in which case TrainingFailure is thrown.
Policy TrainVictim(const envs::Environment& env, const TrainConfig& config,
                   VictimReport* report = nullptr);

}  // namespace mirage::agents

#endif  // MIRAGE_AGENTS_VICTIM_HPP_
