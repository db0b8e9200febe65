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

#include "mirage/harness/pipeline.hpp"

#include <stdexcept>

#include "mirage/agents/evaluation.hpp"
#include "mirage/attacks/tabular.hpp"

namespace mirage::harness {
namespace {

std::optional<double> OptionalDouble(const nlohmann::json& j, const char* key,
                                     std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json ToJson(const DetectorTrainingConfig& c) {
  return {{"scorer", detectors::ToJson(c.scorer)},
          {"training_episodes", c.training_episodes},
          {"calibration_episodes", c.calibration_episodes},
          {"target_fpr", c.target_fpr},
          {"seed", c.seed},
          {"deterministic_victim", c.deterministic_victim}};
}

DetectorTrainingConfig DetectorTrainingConfigFromJson(const nlohmann::json& j) {
  DetectorTrainingConfig c;
  if (j.contains("scorer")) c.scorer = detectors::DynamicsScorerConfigFromJson(j.at("scorer"));
  c.training_episodes = j.value("training_episodes", c.training_episodes);
  c.calibration_episodes = j.value("calibration_episodes", c.calibration_episodes);
  c.target_fpr = j.value("target_fpr", c.target_fpr);
  c.seed = j.value("seed", c.seed);
  c.deterministic_victim = j.value("deterministic_victim", c.deterministic_victim);
  return c;
}

detectors::Detector TrainDetector(const envs::Environment& env, agents::Policy victim,
                                  const DetectorTrainingConfig& config) {
  if (config.training_episodes < 1) {
    throw std::invalid_argument("detector training_episodes must be >= 1");
  }
  victim.set_deterministic(config.deterministic_victim);
  const auto train = agents::EvaluateReturn(env, victim, nullptr, config.training_episodes,
                                            DeriveSeed(config.seed, 1));
  detectors::DynamicsScorerConfig scorer_config = config.scorer;
  scorer_config.seed = DeriveSeed(config.seed, 2);
  detectors::DynamicsScorer scorer =
      detectors::DynamicsScorer::Train(env, train.trajectories, scorer_config);
  const auto held_out = agents::EvaluateReturn(env, victim, nullptr,
                                               config.calibration_episodes,
                                               DeriveSeed(config.seed, 3));
  return detectors::Detector::Calibrate(env, std::move(scorer), held_out.trajectories,
                                        config.target_fpr);
}

nlohmann::json DetectorCheckpointJson(const std::string& env, const detectors::Detector& d) {
  nlohmann::json j = d.ToJson();
  j["env"] = env;
  return j;
}

AdversaryTrainingConfig DefaultAdversaryConfig(const std::string& env,
                                               attacks::AttackKind kind) {
  const bool illusory = kind == attacks::AttackKind::kEpsilonIllusory;
  AdversaryTrainingConfig c;
  c.kind = kind;
  c.train.learning_rate = 3e-4;
  c.train.total_steps = env == "cartpole" && !illusory ? 500000 : 300000;
  // The epsilon-illusory payoff is set by the first observation and collected
  // over the whole episode, so it needs the longer horizon.
  c.train.discount = env == "pendulum" && !illusory ? 0.95 : 0.99;
  c.deterministic_attack = true;
  if (illusory) {
    c.epsilon = 1e-6;
    c.dual.initial_lambda = 100.0;
    c.dual.step_size = 1e4;
    c.dual.lambda_cap = 1e12;
  }
  if (env == "one-step") {
    c.epsilon = 0.0;
    c.dual.initial_lambda = 10.0;
    c.dual.step_size = 1.0;
  }
  return c;
}

nlohmann::json ToJson(const AdversaryTrainingConfig& c) {
  return {{"kind", attacks::ToString(c.kind)},
          {"budget", c.budget ? nlohmann::json(*c.budget) : nlohmann::json(nullptr)},
          {"epsilon", c.epsilon},
          {"train", agents::ToJson(c.train)},
          {"dual", attacks::ToJson(c.dual)},
          {"architecture",
           {{"budget_reference", attacks::ToString(c.architecture.budget_reference)},
            {"dead_zone", c.architecture.dead_zone},
            {"hidden", c.architecture.hidden},
            {"initial_log_std", c.architecture.initial_log_std}}},
          {"deterministic_attack", c.deterministic_attack}};
}

AdversaryTrainingConfig AdversaryTrainingConfigFromJson(const nlohmann::json& j,
                                                        AdversaryTrainingConfig c) {
  if (j.contains("kind")) c.kind = attacks::AttackKindFromString(j.at("kind").get<std::string>());
  c.budget = OptionalDouble(j, "budget", c.budget);
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("train")) {
    nlohmann::json merged = agents::ToJson(c.train);
    merged.update(j.at("train"));
    c.train = agents::TrainConfigFromJson(merged);
  }
  if (j.contains("dual")) {
    nlohmann::json merged = attacks::ToJson(c.dual);
    merged.update(j.at("dual"));
    c.dual = attacks::DualConfigFromJson(merged);
  }
  if (j.contains("architecture")) {
    const auto& a = j.at("architecture");
    if (a.contains("budget_reference")) {
      c.architecture.budget_reference =
          attacks::BudgetReferenceFromString(a.at("budget_reference").get<std::string>());
    }
    c.architecture.dead_zone = a.value("dead_zone", c.architecture.dead_zone);
    c.architecture.hidden = a.value("hidden", c.architecture.hidden);
    c.architecture.initial_log_std = a.value("initial_log_std", c.architecture.initial_log_std);
  }
  c.deterministic_attack = j.value("deterministic_attack", c.deterministic_attack);
  return c;
}

nlohmann::json TrainAdversary(const envs::Environment& env, const agents::Policy& victim,
                              const AdversaryTrainingConfig& config) {
  using attacks::AttackKind;
  if (config.kind != AttackKind::kSamdp && config.kind != AttackKind::kEpsilonIllusory) {
    throw std::invalid_argument("'" + attacks::ToString(config.kind) +
                                "' has no trainable parameters");
  }
  if (env.spec().name == "one-step") {
    if (config.kind != AttackKind::kEpsilonIllusory) {
      throw std::invalid_argument("on the one-step MDP samdp is the closed-form state swap");
    }
    if (config.budget) throw std::invalid_argument("the one-step MDP takes no budget");
    attacks::ExactDualConfig exact;
    const auto result =
        attacks::TrainEpsilonIllusoryExact(env, victim, config.epsilon, config.dual, exact);
    attacks::TabularAttack attack(AttackKind::kEpsilonIllusory, result.emission);
    attack.final_lambda = result.lambda;
    attack.measured_kl = result.kl;
    nlohmann::json j = attack.ToJson();
    j["epsilon"] = config.epsilon;
    return j;
  }

  if (config.kind == AttackKind::kSamdp) {
    if (!config.budget) throw std::invalid_argument("samdp needs a budget");
    attacks::LearnedAttack attack = attacks::TrainSamdpAdversary(
        env, victim, attacks::AttackBudget(*config.budget), config.train, config.architecture);
    attack.policy().set_deterministic(config.deterministic_attack);
    return attack.ToJson();
  }
  std::optional<attacks::AttackBudget> budget;
  if (config.budget) budget = attacks::AttackBudget(*config.budget);
  attacks::EpsilonIllusoryReport report;
  attacks::LearnedAttack attack =
      attacks::TrainEpsilonIllusory(env, victim, config.epsilon, budget, config.dual,
                                    config.train, config.architecture, &report);
  attack.policy().set_deterministic(config.deterministic_attack);
  nlohmann::json j = attack.ToJson();
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [lambda, kl] : report.dual_trace) trace.push_back({lambda, kl});
  j["dual_trace"] = std::move(trace);
  return j;
}

}  // namespace mirage::harness
