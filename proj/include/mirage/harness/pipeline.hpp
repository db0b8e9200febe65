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

#ifndef MIRAGE_HARNESS_PIPELINE_HPP_
#define MIRAGE_HARNESS_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mirage/agents/trainer.hpp"
#include "mirage/attacks/dual.hpp"
#include "mirage/attacks/learned.hpp"
#include "mirage/detectors/cusum.hpp"
#include "mirage/harness/checkpoint.hpp"

namespace mirage::harness {

struct DetectorTrainingConfig {
  detectors::DynamicsScorerConfig scorer;
  int training_episodes = 200;
  // Disjoint from the training episodes.
  int calibration_episodes = 1000;
  double target_fpr = 0.03;
  std::uint64_t seed = 0;
  bool deterministic_victim = false;
};

nlohmann::json ToJson(const DetectorTrainingConfig& c);
DetectorTrainingConfig DetectorTrainingConfigFromJson(const nlohmann::json& j);

// Fits the dynamics scorer on unattacked victim rollouts and calibrates the
// CUSUM rule on a second, held-out batch.
detectors::Detector TrainDetector(const envs::Environment& env, agents::Policy victim,
                                  const DetectorTrainingConfig& config);

// Detector checkpoint: the detector's own JSON plus the environment name.
nlohmann::json DetectorCheckpointJson(const std::string& env, const detectors::Detector& d);

struct AdversaryTrainingConfig {
  attacks::AttackKind kind = attacks::AttackKind::kSamdp;
  std::optional<double> budget;
  double epsilon = 0.0;
  agents::TrainConfig train;
  attacks::DualConfig dual;
  attacks::LearnedAttackSpec architecture;
  // Store the attack policy in mean-action mode.
  bool deterministic_attack = false;
};

// Tuned per environment and attack kind. The epsilon-illusory dual settings
// are matched to how little drift the dynamics detector tolerates.
AdversaryTrainingConfig DefaultAdversaryConfig(const std::string& env,
                                               attacks::AttackKind kind);

nlohmann::json ToJson(const AdversaryTrainingConfig& c);
// Fields missing from `j` keep the values of `defaults`.
AdversaryTrainingConfig AdversaryTrainingConfigFromJson(const nlohmann::json& j,
                                                        AdversaryTrainingConfig defaults);

// Trains the adversary and returns its checkpoint JSON. On the one-step MDP
// only epsilon-illusory is trainable (exact dual ascent); the other kinds are
// closed-form and need no checkpoint.
nlohmann::json TrainAdversary(const envs::Environment& env, const agents::Policy& victim,
                              const AdversaryTrainingConfig& config);

}  // namespace mirage::harness

#endif  // MIRAGE_HARNESS_PIPELINE_HPP_
