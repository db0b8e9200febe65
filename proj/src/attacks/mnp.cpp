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

#include "mirage/attacks/mnp.hpp"

namespace mirage::attacks {

namespace {

Vec RandomDirection(Eigen::Index dim, Rng& rng) {
  Vec v(dim);
  do {
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = StdNormal(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

MnpAttack::MnpAttack(const agents::Policy& victim, AttackBudget budget, MnpConfig config)
    : victim_(victim), budget_(budget), config_(config) {
  if (!victim_.discrete()) {
    throw UnsupportedError("MNP needs a discrete-action victim");
  }
}

Vec MnpAttack::Emit(const Vec& s, int, Rng& rng) {
  if (budget_.radius == 0.0) return s;
  const int target = victim_.Mode(s).index;
  auto score = [&](const Vec& dir) {
    return victim_.Probabilities(s + budget_.radius * dir)[target];
  };
  Vec best_dir = RandomDirection(s.size(), rng);
  double best = score(best_dir);
  for (int k = 1; k < config_.sphere_samples; ++k) {
    Vec dir = RandomDirection(s.size(), rng);
    const double v = score(dir);
    if (v < best) {
      best = v;
      best_dir = std::move(dir);
    }
  }
  for (int k = 0; k < config_.refinement_steps; ++k) {
    Vec dir = best_dir;
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      dir[i] += config_.refinement_jitter * StdNormal(rng);
    }
    dir.normalize();
    const double v = score(dir);
    if (v < best) {
      best = v;
      best_dir = std::move(dir);
    }
  }
  return s + budget_.radius * best_dir;
}

}  // namespace mirage::attacks
