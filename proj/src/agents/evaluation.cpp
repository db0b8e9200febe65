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

#include "mirage/agents/evaluation.hpp"

#include <cmath>
#include <numeric>

namespace mirage::agents {

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double StdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

envs::Trajectory RunEpisode(const envs::Environment& env, const Policy& victim,
                            ObservationChannel* channel, Rng& rng) {
  envs::Trajectory traj;
  Vec state = env.Reset(rng);
  if (channel != nullptr) channel->BeginEpisode(env, rng);
  for (int t = 0; t < env.spec().horizon; ++t) {
    Vec obs = env.Normalize(state);
    if (channel != nullptr) obs = channel->Emit(obs, t, rng);
    envs::Action action = victim.Sample(obs, rng);
    if (channel != nullptr) channel->ObserveAction(action);
    envs::StepResult step = env.Step(state, action, t, rng);
    traj.steps.push_back(envs::TransitionRecord{
        t, state, env.Denormalize(obs), action, step.reward, step.done});
    state = std::move(step.state);
    if (step.done) break;
  }
  return traj;
}

EvaluationResult EvaluateReturn(const envs::Environment& env, const Policy& victim,
                                ObservationChannel* channel, int episodes,
                                std::uint64_t seed, bool keep_trajectories) {
  if (episodes < 1) throw std::invalid_argument("EvaluateReturn: episodes must be >= 1");
  EvaluationResult result;
  result.returns.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(e)));
    envs::Trajectory traj = RunEpisode(env, victim, channel, rng);
    result.returns.push_back(traj.Return());
    if (keep_trajectories) result.trajectories.push_back(std::move(traj));
  }
  result.mean = Mean(result.returns);
  result.stddev = StdDev(result.returns);
  return result;
}

}  // namespace mirage::agents
