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

#ifndef MIRAGE_HARNESS_CHECKPOINT_HPP_
#define MIRAGE_HARNESS_CHECKPOINT_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mirage/agents/trainer.hpp"
#include "mirage/agents/victim.hpp"
#include "mirage/attacks/attack.hpp"
#include "mirage/attacks/learned.hpp"
#include "mirage/attacks/mnp.hpp"
#include "mirage/detectors/cusum.hpp"

namespace mirage::harness {

// Throws std::runtime_error naming the path when the file is missing or
// does not parse.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; parent directories are created.
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

struct VictimCheckpoint {
  std::string env;
  agents::Policy policy;
  agents::TrainConfig config;
  agents::VictimReport report;
};

nlohmann::json ToJson(const VictimCheckpoint& c);
VictimCheckpoint VictimCheckpointFromJson(const nlohmann::json& j);

// What the evaluator needs to rebuild an attack.
struct AttackSpec {
  attacks::AttackKind kind = attacks::AttackKind::kIdentity;
  std::optional<double> budget;
  // Trained attack parameters (samdp, epsilon-illusory); empty otherwise.
  std::string checkpoint;
  attacks::MnpConfig mnp;
};

nlohmann::json ToJson(const AttackSpec& s);
AttackSpec AttackSpecFromJson(const nlohmann::json& j);

// Builds a ready-to-run attack. On the one-step MDP every kind maps to an
// emission table: samdp is the swap attack and perfect-illusory the
// distribution-preserving scheme. `victim` must outlive the attack.
std::unique_ptr<attacks::Attack> MakeAttack(const envs::Environment& env,
                                            const agents::Policy& victim,
                                            const AttackSpec& spec);

}  // namespace mirage::harness

#endif  // MIRAGE_HARNESS_CHECKPOINT_HPP_
