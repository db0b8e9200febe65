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

#ifndef MIRAGE_ATTACKS_LEARNED_HPP_
#define MIRAGE_ATTACKS_LEARNED_HPP_

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/agents/trainer.hpp"
#include "mirage/attacks/attack.hpp"
#include "mirage/attacks/dual.hpp"

namespace mirage::attacks {

// Which point the per-step budget ball is centred on for epsilon-illusory
// attacks: the true state (default, matches MNP/SA-MDP) or the dynamics
// prediction from the previous observation.
enum class BudgetReference { kTrueState, kPrediction };

std::string ToString(BudgetReference r);
BudgetReference BudgetReferenceFromString(const std::string& s);

struct LearnedAttackSpec {
  AttackKind kind = AttackKind::kSamdp;  // kSamdp or kEpsilonIllusory
  std::optional<AttackBudget> budget;
  double epsilon = 0.0;
  BudgetReference budget_reference = BudgetReference::kTrueState;
  // Per-coordinate dead zone on the epsilon-illusory correction, as a
  // fraction of [-1, 1]; lets a stochastic policy emit the prediction exactly.
  double dead_zone = 0.2;
  std::vector<int> hidden = {64, 64};
  double initial_log_std = -1.0;
};

// An attack driven by a learned stochastic policy.
//
// SA-MDP: the policy sees the normalised true state s and outputs
// delta in [-1, 1]^d; the victim sees o = s + B * clip_unit_ball(delta).
//
// epsilon-illusory: the policy sees (s, prediction, first-step flag), where
// prediction = p(o_prev, a_prev) is the transition model applied to the
// previous emission and victim action (the initial-distribution mean at t = 0).
// The emission is o = base + B * deadzone(delta), projected onto the budget
// ball, where base is the prediction for t > 0 and the true state at t = 0
// (the mean is generally not a valid state). The first emission is clamped to
// the initial-state support. With delta inside the dead zone the attack
// replays the environment's own dynamics.
class LearnedAttack final : public Attack {
 public:
  LearnedAttack(const envs::Environment& env, LearnedAttackSpec spec,
                agents::Policy policy);

  // Fresh policy with the architecture this spec calls for.
  static agents::Policy MakePolicy(const envs::Environment& env,
                                   const LearnedAttackSpec& spec, Rng& rng);
  static int FeatureDim(const envs::Environment& env, AttackKind kind);

  AttackKind kind() const override { return spec_.kind; }
  std::optional<AttackBudget> budget() const override { return spec_.budget; }
  const LearnedAttackSpec& spec() const { return spec_; }

  void BeginEpisode(const envs::Environment& env, Rng& rng) override;
  Vec Emit(const Vec& normalized_state, int t, Rng& rng) override;
  void ObserveAction(const envs::Action& action) override { last_action_ = action; }

  // The two halves of Emit, exposed for training: Features refreshes the
  // dynamics prediction and returns the policy input; Apply turns a policy
  // action into the emitted observation and records it.
  Vec Features(const Vec& normalized_state, int t, Rng& rng);
  Vec Apply(const Vec& normalized_state, const Vec& delta);
  const Vec& prediction() const { return prediction_; }

  agents::Policy& policy() { return policy_; }
  const agents::Policy& policy() const { return policy_; }

  // Training metadata carried in checkpoints.
  double final_lambda = 0.0;
  double measured_kl = 0.0;

  nlohmann::json ToJson() const;
  static LearnedAttack FromJson(const envs::Environment& env, const nlohmann::json& j);

 private:
  const envs::Environment& env_;
  LearnedAttackSpec spec_;
  agents::Policy policy_;
  Vec prediction_;
  Vec last_emission_;
  bool first_step_ = true;
  envs::Action last_action_;
};

// The adversary's induced MDP: the adversary acts by choosing observations,
// the frozen victim acts on them in the true environment. Rewards are
// -r_victim (SA-MDP) or the penalised adversary reward (epsilon-illusory),
// with one dual update at the end of every episode.
class AdversaryTask final : public agents::EpisodicTask {
 public:
  AdversaryTask(const envs::Environment& env, const agents::Policy& victim,
                LearnedAttack& shell, DualState* dual, double lambda_cap);

  int ObservationDim() const override;
  envs::ActionSpace ActionSpace() const override;
  Vec Reset(Rng& rng) override;
  agents::TaskStep Step(const envs::Action& action, Rng& rng) override;

  // Per-episode dual-ascent trace: (lambda after update, window estimate).
  const std::vector<std::pair<double, double>>& dual_trace() const { return dual_trace_; }

 private:
  const envs::Environment& env_;
  const agents::Policy& victim_;
  LearnedAttack& shell_;
  DualState* dual_;
  double lambda_cap_;
  Vec state_;
  int t_ = 0;
  std::vector<std::pair<double, double>> dual_trace_;
};

LearnedAttack TrainSamdpAdversary(const envs::Environment& env, const agents::Policy& victim,
                                  AttackBudget budget, const agents::TrainConfig& config,
                                  const LearnedAttackSpec& architecture = {});

struct EpsilonIllusoryReport {
  double final_lambda = 0.0;
  double final_window_kl = 0.0;
  std::vector<std::pair<double, double>> dual_trace;
};

// Dual ascent with the sliding-window consistency surrogate. Throws
// TrainingFailure when lambda runs past the configured cap.
LearnedAttack TrainEpsilonIllusory(const envs::Environment& env, const agents::Policy& victim,
                                   double epsilon, std::optional<AttackBudget> budget,
                                   const DualConfig& dual_config,
                                   const agents::TrainConfig& train_config,
                                   const LearnedAttackSpec& architecture = {},
                                   EpsilonIllusoryReport* report = nullptr);

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_LEARNED_HPP_
