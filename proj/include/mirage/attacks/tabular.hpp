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

#ifndef MIRAGE_ATTACKS_TABULAR_HPP_
#define MIRAGE_ATTACKS_TABULAR_HPP_

#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/attacks/attack.hpp"
#include "mirage/attacks/dual.hpp"
#include "mirage/estimators/kl.hpp"

namespace mirage::attacks {

// Memoryless emission table for the one-step MDP: row s holds nu(. | s).
class TabularAttack final : public Attack, public estimators::EmissionDensity {
 public:
  TabularAttack(AttackKind kind, Mat emission);

  static Mat IdentityEmission();
  // Always shows the other state.
  static Mat SwapEmission();
  // Always fools in the first state and half the time in the second, which
  // leaves the observed initial distribution unchanged.
  static Mat PerfectIllusoryEmission();

  AttackKind kind() const override { return kind_; }
  const Mat& emission() const { return emission_; }

  Vec Emit(const Vec& normalized_state, int t, Rng& rng) override;
  double LogDensity(const Vec& observation, const Vec& state,
                    std::span<const envs::TransitionRecord> history) const override;

  double final_lambda = 0.0;
  double measured_kl = 0.0;

  nlohmann::json ToJson() const;
  static TabularAttack FromJson(const nlohmann::json& j);

 private:
  AttackKind kind_;
  Mat emission_;
};

// Expected victim return on the one-step MDP under `emission`, by enumeration
// over (s, o, a). Honours the victim's deterministic mode.
double ExactAttackedReturn(const agents::Policy& victim, const Mat& emission);

struct ExactDualConfig {
  int outer_iterations = 4000;
  int inner_steps = 10;
  double learning_rate = 0.05;
  // lambda held at zero: the unconstrained attack.
  bool unconstrained = false;
};

struct ExactDualResult {
  Mat emission;
  double lambda = 0.0;
  double kl = 0.0;
  double victim_return = 0.0;
  // (lambda, exact KL) after every outer iteration.
  std::vector<std::pair<double, double>> trace;
};

// Dual ascent on the one-step MDP with the exact KL: Adam on softmax logits of
// nu minimising E[R] + lambda * KL, then lambda <- max(lambda + step * (KL - epsilon), 0).
ExactDualResult TrainEpsilonIllusoryExact(const envs::Environment& env,
                                          const agents::Policy& victim, double epsilon,
                                          const DualConfig& dual_config,
                                          const ExactDualConfig& config = {});

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_TABULAR_HPP_
