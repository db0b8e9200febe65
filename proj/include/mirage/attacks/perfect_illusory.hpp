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

#ifndef MIRAGE_ATTACKS_PERFECT_ILLUSORY_HPP_
#define MIRAGE_ATTACKS_PERFECT_ILLUSORY_HPP_

#include "mirage/attacks/attack.hpp"

namespace mirage::attacks {

// Shows the victim an independent, dynamics-consistent episode: the first
// observation mirrors the true initial state through the environment's
// symmetry point, and every later observation is a fresh draw of the true
// transition function applied to the previous observation and the victim's
// previous action. Refused for environments whose initial distribution has
// no symmetry point.
class PerfectIllusoryAttack final : public Attack {
 public:
  explicit PerfectIllusoryAttack(const envs::Environment& env);

  AttackKind kind() const override { return AttackKind::kPerfectIllusory; }
  void BeginEpisode(const envs::Environment& env, Rng& rng) override;
  Vec Emit(const Vec& normalized_state, int t, Rng& rng) override;
  void ObserveAction(const envs::Action& action) override { last_action_ = action; }

  // o_0 = -(s_0 - p) + p, in raw units.
  static Vec Mirror(const Vec& state, const Vec& symmetry_point);

 private:
  const envs::Environment& env_;
  Vec symmetry_point_;
  Vec last_observation_;  // raw units
  envs::Action last_action_;
};

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_PERFECT_ILLUSORY_HPP_
