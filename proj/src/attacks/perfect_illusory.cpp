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

#include "mirage/attacks/perfect_illusory.hpp"

namespace mirage::attacks {

PerfectIllusoryAttack::PerfectIllusoryAttack(const envs::Environment& env) : env_(env) {
  if (!env.spec().symmetry_point) {
    throw std::invalid_argument(
        "perfect illusory attack needs an initial distribution symmetric about a "
        "point; '" + env.spec().name + "' declares none");
  }
  symmetry_point_ = *env.spec().symmetry_point;
}

Vec PerfectIllusoryAttack::Mirror(const Vec& state, const Vec& symmetry_point) {
  return 2.0 * symmetry_point - state;
}

void PerfectIllusoryAttack::BeginEpisode(const envs::Environment&, Rng&) {
  last_observation_.resize(0);
}

Vec PerfectIllusoryAttack::Emit(const Vec& normalized_state, int t, Rng& rng) {
  if (t == 0 || last_observation_.size() == 0) {
    last_observation_ = Mirror(env_.Denormalize(normalized_state), symmetry_point_);
  } else {
    last_observation_ = env_.TransitionSample(last_observation_, last_action_, rng);
  }
  return env_.Normalize(last_observation_);
}

}  // namespace mirage::attacks
