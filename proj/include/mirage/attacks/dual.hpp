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

#ifndef MIRAGE_ATTACKS_DUAL_HPP_
#define MIRAGE_ATTACKS_DUAL_HPP_

#include <nlohmann/json.hpp>

#include "mirage/common.hpp"
#include "mirage/estimators/kl.hpp"

namespace mirage::attacks {

// Lagrange multiplier state for the KL-constrained attack objective.
struct DualState {
  double lambda = 10.0;
  double epsilon = 0.0;
  double step_size = 0.1;
  estimators::SlidingWindow window{estimators::SlidingWindow::kDefaultCapacity};
};

// lambda' = max(lambda + step_size * (kl_estimate - epsilon), 0). A zero
// violation leaves lambda unchanged.
DualState DualUpdate(DualState state, double kl_estimate);

// -r - lambda * (||o - prediction||^2 - epsilon).
double AdversaryReward(double victim_reward, const Vec& emitted, const Vec& prediction,
                       double lambda, double epsilon);

struct DualConfig {
  double initial_lambda = 10.0;
  double step_size = 0.1;
  // Training is reported as failed once lambda exceeds this.
  double lambda_cap = 1e4;
  std::size_t window = estimators::SlidingWindow::kDefaultCapacity;
};

nlohmann::json ToJson(const DualConfig& c);
DualConfig DualConfigFromJson(const nlohmann::json& j);

}  // namespace mirage::attacks

#endif  // MIRAGE_ATTACKS_DUAL_HPP_
