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

#include "mirage/detectors/cusum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mirage::detectors {

DetectorVerdict CusumRun(std::span<const double> scores, const DecisionRuleParams& params) {
  DetectorVerdict v;
  double s = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    s = std::max(0.0, s + scores[t] - params.reference_mean - params.drift);
    v.max_statistic = std::max(v.max_statistic, s);
    if (s > params.threshold) {
      v.attacked = true;
      v.alarm_step = static_cast<int>(t);
      return v;
    }
  }
  return v;
}

double CusumMaxStatistic(std::span<const double> scores, double reference_mean, double drift) {
  double s = 0.0;
  double best = 0.0;
  for (double x : scores) {
    s = std::max(0.0, s + x - reference_mean - drift);
    best = std::max(best, s);
  }
  return best;
}

DecisionRuleParams CalibrateCusum(const std::vector<std::vector<double>>& episode_scores,
                                  double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr <= 1.0)) {
    throw std::invalid_argument("CalibrateCusum: target FPR must lie in (0, 1]");
  }
  if (episode_scores.empty()) throw std::invalid_argument("CalibrateCusum: no episodes");
  double sum = 0.0;
  double sum_sq = 0.0;
  long n = 0;
  for (const auto& ep : episode_scores) {
    for (double x : ep) {
      sum += x;
      sum_sq += x * x;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("CalibrateCusum: no scored transitions");
  DecisionRuleParams p;
  p.target_fpr = target_fpr;
  p.reference_mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) -
                                       p.reference_mean * p.reference_mean);
  const double sd = std::sqrt(var);
  const bool degenerate = !(sd > 1e-12 * std::max(1.0, std::abs(p.reference_mean)));
  p.drift = degenerate ? 0.0 : 0.5 * sd;

  std::vector<double> maxima;
  maxima.reserve(episode_scores.size());
  for (const auto& ep : episode_scores) {
    maxima.push_back(CusumMaxStatistic(ep, p.reference_mean, p.drift));
  }
  std::sort(maxima.begin(), maxima.end());
  constexpr double kTiny = std::numeric_limits<double>::denorm_min();
  if (degenerate) {
    p.threshold = std::max(std::nextafter(maxima.back(), std::numeric_limits<double>::infinity()),
                           kTiny);
    return p;
  }
  const auto m = static_cast<long>(maxima.size());
  // Number of calibration episodes allowed to alarm.
  const long k = static_cast<long>(std::floor(target_fpr * static_cast<double>(m) + 1e-9));
  p.threshold = k >= m ? maxima.front() : maxima[static_cast<std::size_t>(m - k - 1)];
  p.threshold = std::max(p.threshold, kTiny);
  return p;
}

Detector Detector::Calibrate(const envs::Environment& env, DynamicsScorer scorer,
                             std::span<const envs::Trajectory> held_out, double target_fpr) {
  if (static_cast<int>(held_out.size()) < kMinCalibrationEpisodes) {
    throw std::invalid_argument("Detector::Calibrate: " + std::to_string(held_out.size()) +
                                " held-out episodes, need at least " +
                                std::to_string(kMinCalibrationEpisodes));
  }
  std::vector<std::vector<double>> scores;
  scores.reserve(held_out.size());
  for (const auto& traj : held_out) scores.push_back(scorer.ScoreEpisode(env, traj));
  const DecisionRuleParams params = CalibrateCusum(scores, target_fpr);
  return Detector(std::move(scorer), params, DatasetHash(held_out),
                  static_cast<int>(held_out.size()));
}

DetectorVerdict Detector::Judge(const envs::Environment& env,
                                const envs::Trajectory& trajectory) const {
  const std::vector<double> scores = scorer_.ScoreEpisode(env, trajectory);
  return CusumRun(scores, params_);
}

nlohmann::json Detector::ToJson() const {
  return {{"scorer", scorer_.ToJson()},
          {"reference_mean", params_.reference_mean},
          {"drift", params_.drift},
          {"threshold", params_.threshold},
          {"target_fpr", params_.target_fpr},
          {"calibration_episodes", calibration_episodes_},
          {"calibration_hash", calibration_hash_}};
}

Detector Detector::FromJson(const nlohmann::json& j) {
  DecisionRuleParams p;
  p.reference_mean = j.at("reference_mean").get<double>();
  p.drift = j.at("drift").get<double>();
  p.threshold = j.at("threshold").get<double>();
  p.target_fpr = j.at("target_fpr").get<double>();
  return Detector(DynamicsScorer::FromJson(j.at("scorer")), p,
                  j.at("calibration_hash").get<std::uint64_t>(),
                  j.at("calibration_episodes").get<int>());
}

}  // namespace mirage::detectors
