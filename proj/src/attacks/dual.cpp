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

#include "mirage/attacks/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mirage::attacks {

DualState DualUpdate(DualState state, double kl_estimate) {
  if (!std::isfinite(kl_estimate)) {
    throw std::invalid_argument("DualUpdate: non-finite KL estimate");
  }
  state.lambda = std::max(state.lambda + state.step_size * (kl_estimate - state.epsilon), 0.0);
  return state;
}

double AdversaryReward(double victim_reward, const Vec& emitted, const Vec& prediction,
                       double lambda, double epsilon) {
  return -victim_reward - lambda * ((emitted - prediction).squaredNorm() - epsilon);
}

nlohmann::json ToJson(const DualConfig& c) {
  return {{"initial_lambda", c.initial_lambda},
          {"step_size", c.step_size},
          {"lambda_cap", c.lambda_cap},
          {"window", c.window}};
}

DualConfig DualConfigFromJson(const nlohmann::json& j) {
  DualConfig c;
  c.initial_lambda = j.value("initial_lambda", c.initial_lambda);
  c.step_size = j.value("step_size", c.step_size);
  c.lambda_cap = j.value("lambda_cap", c.lambda_cap);
  c.window = j.value("window", c.window);
  if (c.initial_lambda < 0.0 || !(c.step_size > 0.0) || c.window == 0) {
    throw std::invalid_argument("DualConfig: need lambda >= 0, step > 0, window > 0");
  }
  return c;
}

}  // namespace mirage::attacks
