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

#ifndef MIRAGE_DETECTORS_CUSUM_HPP_
#define MIRAGE_DETECTORS_CUSUM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/detectors/dynamics.hpp"

namespace mirage::detectors {

struct DecisionRuleParams {
  double reference_mean = 0.0;  // mean held-out anomaly score
  double drift = 0.0;           // kappa >= 0
  double threshold = 1.0;       // h > 0
  double target_fpr = 0.03;
};

struct DetectorVerdict {
  bool attacked = false;
  std::optional<int> alarm_step;
  double max_statistic = 0.0;
};

// S_0 = 0, S_t = max(0, S_{t-1} + score_t - reference_mean - drift); alarm at
// the first S_t > threshold.
DetectorVerdict CusumRun(std::span<const double> scores, const DecisionRuleParams& params);

// Largest CUSUM statistic over the whole sequence (no early stop).
double CusumMaxStatistic(std::span<const double> scores, double reference_mean, double drift);

// drift = half the standard deviation of all held-out step scores; threshold =
// the (1 - target_fpr) quantile of per-episode maximum statistics. With
// constant scores the drift is 0 and the threshold is the next float above
// the largest statistic.
DecisionRuleParams CalibrateCusum(const std::vector<std::vector<double>>& episode_scores,
                                  double target_fpr);

inline constexpr int kMinCalibrationEpisodes = 100;

// Scorer plus calibrated decision rule.
class Detector {
 public:
  Detector(DynamicsScorer scorer, DecisionRuleParams params, std::uint64_t calibration_hash,
           int calibration_episodes)
      : scorer_(std::move(scorer)),
        params_(params),
        calibration_hash_(calibration_hash),
        calibration_episodes_(calibration_episodes) {}

  // Refuses fewer than kMinCalibrationEpisodes held-out episodes.
  static Detector Calibrate(const envs::Environment& env, DynamicsScorer scorer,
                            std::span<const envs::Trajectory> held_out, double target_fpr);

  DetectorVerdict Judge(const envs::Environment& env, const envs::Trajectory& trajectory) const;

  const DynamicsScorer& scorer() const { return scorer_; }
  const DecisionRuleParams& params() const { return params_; }
  std::uint64_t calibration_hash() const { return calibration_hash_; }

  nlohmann::json ToJson() const;
  static Detector FromJson(const nlohmann::json& j);

 private:
  DynamicsScorer scorer_;
  DecisionRuleParams params_;
  std::uint64_t calibration_hash_;
  int calibration_episodes_;
};

}  // namespace mirage::detectors

#endif  // MIRAGE_DETECTORS_CUSUM_HPP_
