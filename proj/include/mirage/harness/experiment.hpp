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

#ifndef MIRAGE_HARNESS_EXPERIMENT_HPP_
#define MIRAGE_HARNESS_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/harness/checkpoint.hpp"

namespace mirage::harness {

struct ExperimentConfig {
  std::string name;
  std::string env;
  AttackSpec attack;
  std::string victim_checkpoint;
  std::string detector_checkpoint;  // optional
  int episodes_per_seed = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  bool deterministic_victim = false;
  std::string output_dir = "results";
  bool save_trajectories = true;
  // Anchor for the scores; when absent the lower of the attacked and
  // unattacked means is used until `report` recomputes it across runs.
  std::optional<double> worst_mean;

  void Validate() const;
};

nlohmann::json ToJson(const ExperimentConfig& c);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<double> returns;
  std::vector<bool> detected;
  std::vector<int> alarm_steps;  // -1 where no alarm fired
  double mean = 0.0;
  double detection_rate = 0.0;
  double unattacked_mean = 0.0;
};

struct RunResult {
  std::string name;
  std::string env;
  std::string attack;
  std::optional<double> budget;
  bool has_detector = false;
  std::vector<SeedResult> seeds;
  std::vector<std::pair<std::uint64_t, std::string>> missing_seeds;

  double mean = 0.0;    // pooled over episodes
  double stddev = 0.0;  // of per-seed means
  double detection_rate = 0.0;
  double detection_rate_stddev = 0.0;  // of per-seed rates
  double unattacked_mean = 0.0;
  double worst_mean = 0.0;
  double adversary_score = 0.0;
  double detection_adjusted_score = 0.0;
  long budget_violations = 0;
  double max_deviation = 0.0;  // max ||o - s||_2 over logged steps, normalised

  std::vector<double> AllReturns() const;
  std::vector<bool> AllDetected() const;
  // Fills worst_mean and both scores from the pooled episodes.
  void Rescore(double worst);
};

nlohmann::json ToJson(const RunResult& r);
RunResult RunResultFromJson(const nlohmann::json& j);

// Rolls out every seed (attacked and unattacked), judges attacked episodes
// with the detector when one is configured, and scores the run. When
// `write_outputs` is set, writes <output_dir>/<name>.result.json and, if the
// config asks for it, one <name>.seed<k>.jsonl trajectory log per seed.
RunResult RunExperiment(const ExperimentConfig& config, bool write_outputs = true);

// Groups results by (env, budget), anchors worst_mean at the lowest mean
// return in each group, and rescores. The returned JSON lists the groups
// with their anchors and each run's summary.
nlohmann::json BuildReport(std::vector<RunResult>& results);

}  // namespace mirage::harness

#endif  // MIRAGE_HARNESS_EXPERIMENT_HPP_
