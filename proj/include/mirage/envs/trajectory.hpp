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

#ifndef MIRAGE_ENVS_TRAJECTORY_HPP_
#define MIRAGE_ENVS_TRAJECTORY_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/envs/environment.hpp"

namespace mirage::envs {

// One logged step. `state` is the true state the step started from and
// `observation` is what the victim was shown for it (same shape, raw units).
struct TransitionRecord {
  int t = 0;
  Vec state;
  Vec observation;
  Action action;
  double reward = 0.0;
  bool done = false;
};

struct Trajectory {
  std::vector<TransitionRecord> steps;

  double Return() const;
  std::size_t size() const { return steps.size(); }
};

struct TrajectoryLogHeader {
  EnvSpec spec;
  std::uint64_t seed = 0;
  std::string label;
};

nlohmann::json ToJson(const TransitionRecord& record);
TransitionRecord TransitionFromJson(const nlohmann::json& j);

// JSONL: a header line {"type": "header", ...} followed by one record per
// line, each tagged with its episode index.
void WriteTrajectoryLog(std::ostream& out, const TrajectoryLogHeader& header,
                        const std::vector<Trajectory>& episodes);
std::vector<Trajectory> ReadTrajectoryLog(std::istream& in,
                                          nlohmann::json* header = nullptr);

}  // namespace mirage::envs

#endif  // MIRAGE_ENVS_TRAJECTORY_HPP_
