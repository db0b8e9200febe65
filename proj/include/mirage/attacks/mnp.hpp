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

#ifndef MIRAGE_ATTACKS_MNP_HPP_
#define MIRAGE_ATTACKS_MNP_HPP_

#include "mirage/agents/policy.hpp"
#include "mirage/attacks/attack.hpp"

namespace mirage::attacks {

struct MnpConfig {
  int sphere_samples = 32;
  int refinement_steps = 8;
  // Std-dev of the direction jitter used while refining.
  double refinement_jitter = 0.3;
};

// White-box minimum-norm perturbation against a discrete-action victim:
// searches the budget sphere for the observation that minimises the
// probability of the action the victim would take on the clean state.
class MnpAttack final : public Attack {
 public:
  MnpAttack(const agents::Policy& victim, AttackBudget budget, MnpConfig config = {});

  AttackKind kind() const override { return AttackKind::kMnp; }
  std::optional<AttackBudget> budget() const override { return budget_; }
  Vec Emit(const Vec& normalized_state, int t, Rng& rng) override;

 private:
  const agents::Policy& victim_;
  AttackBudget budget_;
  MnpConfig config_;
};

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_MNP_HPP_
