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

#ifndef MIRAGE_AGENTS_EVALUATION_HPP_
#define MIRAGE_AGENTS_EVALUATION_HPP_

#include <cstdint>
#include <vector>

#include "mirage/agents/policy.hpp"
#include "mirage/envs/trajectory.hpp"

namespace mirage::agents {

// Sits between the true state and the victim. Works in normalised
// observation coordinates (state ./ observation_scale).
class ObservationChannel {
 public:
  virtual ~ObservationChannel() = default;
  virtual void BeginEpisode(const envs::Environment& env, Rng& rng) {
    (void)env;
    (void)rng;
  }
  virtual Vec Emit(const Vec& normalized_state, int t, Rng& rng) = 0;
  virtual void ObserveAction(const envs::Action& action) { (void)action; }
};

struct EvaluationResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> returns;
  std::vector<envs::Trajectory> trajectories;
};

envs::Trajectory RunEpisode(const envs::Environment& env, const Policy& victim,
                            ObservationChannel* channel, Rng& rng);

// Episode e runs on its own stream seeded with DeriveSeed(seed, e), so results
// do not depend on how episodes are scheduled. Returns are undiscounted.
EvaluationResult EvaluateReturn(const envs::Environment& env, const Policy& victim,
                                ObservationChannel* channel, int episodes,
                                std::uint64_t seed, bool keep_trajectories = true);

double Mean(const std::vector<double>& v);
double StdDev(const std::vector<double>& v);

}  // namespace mirage::agents

#endif  // MIRAGE_AGENTS_EVALUATION_HPP_
