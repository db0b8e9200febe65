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

#include "mirage/attacks/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace mirage::attacks {

std::string ToString(AttackKind kind) {
  switch (kind) {
    case AttackKind::kIdentity: return "identity";
    case AttackKind::kMnp: return "mnp";
    case AttackKind::kSamdp: return "samdp";
    case AttackKind::kPerfectIllusory: return "perfect-illusory";
    case AttackKind::kEpsilonIllusory: return "epsilon-illusory";
  }
  return "";
}

AttackKind AttackKindFromString(const std::string& s) {
  if (s == "identity") return AttackKind::kIdentity;
  if (s == "mnp") return AttackKind::kMnp;
  if (s == "samdp") return AttackKind::kSamdp;
  if (s == "perfect-illusory") return AttackKind::kPerfectIllusory;
  if (s == "epsilon-illusory") return AttackKind::kEpsilonIllusory;
  throw std::invalid_argument("unknown attack kind '" + s + "'");
}

AttackBudget::AttackBudget(double r) : radius(r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("attack budget must be finite and >= 0");
  }
}

Vec ProjectToBall(const Vec& center, const Vec& point, double radius) {
  const Vec d = point - center;
  const double n = d.norm();
  if (n <= radius) return point;
  return center + d * (radius / n);
}

}  // namespace mirage::attacks
