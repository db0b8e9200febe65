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

#ifndef MIRAGE_DETECTORS_DYNAMICS_HPP_
#define MIRAGE_DETECTORS_DYNAMICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/agents/mlp.hpp"
#include "mirage/envs/trajectory.hpp"

namespace mirage::detectors {

struct DynamicsScorerConfig {
  std::vector<int> hidden = {32, 32};  // empty: linear model
  int epochs = 30;
  int minibatch_size = 64;
  double learning_rate = 1e-3;
  long min_transitions = 1000;
  std::uint64_t seed = 0;
};

nlohmann::json ToJson(const DynamicsScorerConfig& c);
DynamicsScorerConfig DynamicsScorerConfigFromJson(const nlohmann::json& j);

// Gaussian one-step model of the observation process: given the normalised
// observation o_t and the victim's action a_t, o_{t+1} ~ N(o_t + f(o_t, a_t),
// diag(sigma^2)). f is fitted by least squares and sigma is the per-dimension
// residual spread on the training data. The anomaly score of a transition is
// its negative log-likelihood.
class DynamicsScorer {
 public:
  static DynamicsScorer Train(const envs::Environment& env,
                              std::span<const envs::Trajectory> unattacked,
                              const DynamicsScorerConfig& config);

  Vec Predict(const Vec& observation, const envs::Action& action) const;
  double Score(const Vec& observation, const envs::Action& action,
               const Vec& next_observation) const;
  // One score per consecutive pair of logged observations (raw units).
  std::vector<double> ScoreEpisode(const envs::Environment& env,
                                   const envs::Trajectory& trajectory) const;

  const Vec& sigma() const { return sigma_; }
  long training_transitions() const { return training_transitions_; }

  nlohmann::json ToJson() const;
  static DynamicsScorer FromJson(const nlohmann::json& j);

 private:
  envs::ActionSpace action_space_;
  agents::Mlp net_;
  Vec input_scale_;
  Vec target_scale_;
  Vec sigma_;
  long training_transitions_ = 0;
};

// Number of (o_t, a_t, o_{t+1}) pairs available in `trajectories`.
long CountTransitions(std::span<const envs::Trajectory> trajectories);

// FNV-1a over every logged observation, action and reward.
std::uint64_t DatasetHash(std::span<const envs::Trajectory> trajectories);

}  // namespace mirage::detectors

#endif  // MIRAGE_DETECTORS_DYNAMICS_HPP_
