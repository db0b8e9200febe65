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

#ifndef MIRAGE_ATTACKS_ATTACK_HPP_
#define MIRAGE_ATTACKS_ATTACK_HPP_

#include <memory>
#include <optional>
#include <string>

#include "mirage/agents/evaluation.hpp"

namespace mirage::attacks {

enum class AttackKind { kIdentity, kMnp, kSamdp, kPerfectIllusory, kEpsilonIllusory };

// CLI spellings: identity, mnp, samdp, perfect-illusory, epsilon-illusory.
std::string ToString(AttackKind kind);
AttackKind AttackKindFromString(const std::string& s);

// L2 radius per step, measured on normalised observations.
struct AttackBudget {
  double radius = 0.0;

  explicit AttackBudget(double r);
};

// Closest point to `point` inside the ball of `radius` around `center`.
Vec ProjectToBall(const Vec& center, const Vec& point, double radius);

// Slack allowed by the budget invariant ||o - s||_2 <= B + kBudgetTolerance.
inline constexpr double kBudgetTolerance = 1e-6;

class Attack : public agents::ObservationChannel {
 public:
  virtual AttackKind kind() const = 0;
  virtual std::optional<AttackBudget> budget() const { return std::nullopt; }
};

// Shows the victim the true state unchanged.
class IdentityAttack final : public Attack {
 public:
  AttackKind kind() const override { return AttackKind::kIdentity; }
  Vec Emit(const Vec& normalized_state, int, Rng&) override { return normalized_state; }
};

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_ATTACK_HPP_
