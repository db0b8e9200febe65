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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mirage/agents/evaluation.hpp"
#include "mirage/agents/victim.hpp"
#include "mirage/detectors/cusum.hpp"
#include "mirage/detectors/dynamics.hpp"
#include "mirage/detectors/hypothesis.hpp"

namespace mirage::detectors {
namespace {

using estimators::CategoricalDist;

CategoricalDist Dist(double a, double b) {
  Vec v(2);
  v << a, b;
  return CategoricalDist(v);
}

int Draw(const CategoricalDist& p, Rng& rng) {
  return Uniform(rng, 0.0, 1.0) < p[0] ? 0 : 1;
}

TEST(Llr, Examples) {
  const CategoricalDist p1 = Dist(0.9, 0.1), p2 = Dist(0.1, 0.9);
  for (int q = 0; q < 2; ++q) EXPECT_EQ(LlrDecide(p1, p1, q, 0.0).hypothesis, Hypothesis::kH0);
  const LlrDecision d0 = LlrDecide(p1, p2, 0, 0.0);
  EXPECT_EQ(d0.hypothesis, Hypothesis::kH0);
  EXPECT_NEAR(d0.llr, std::log(9.0), 1e-12);
  EXPECT_EQ(LlrDecide(p1, p2, 1, 0.0).hypothesis, Hypothesis::kH1);
}

TEST(Llr, ZeroDensities) {
  const LlrDecision both = LlrDecide(0.0, 0.0, 0.0);
  EXPECT_EQ(both.hypothesis, Hypothesis::kH0);
  EXPECT_TRUE(both.undefined_ratio);
  EXPECT_EQ(LlrDecide(0.0, 0.5, 0.0).hypothesis, Hypothesis::kH1);
  EXPECT_EQ(LlrDecide(0.5, 0.0, 0.0).hypothesis, Hypothesis::kH0);
  // Ties go to H0.
  EXPECT_EQ(LlrDecide(0.5, 0.5, 0.0).hypothesis, Hypothesis::kH0);
}

TEST(BinaryRelativeEntropy, Values) {
  EXPECT_EQ(BinaryRelativeEntropy(0.5, 0.5), 0.0);
  EXPECT_NEAR(BinaryRelativeEntropy(0.0, 0.05), -std::log(0.05), 1e-12);
  EXPECT_NEAR(BinaryRelativeEntropy(0.01, 0.01),
              0.01 * std::log(0.01 / 0.99) + 0.99 * std::log(0.99 / 0.01), 1e-12);
  EXPECT_NEAR(BinaryRelativeEntropy(0.01, 0.01), 4.503, 1e-3);
  EXPECT_EQ(BinaryRelativeEntropy(0.5, 0.0), std::numeric_limits<double>::infinity());
  EXPECT_THROW(BinaryRelativeEntropy(1.5, 0.1), std::invalid_argument);
}

// The optimal single-sample test cannot beat the data-processing bound.
TEST(BinaryRelativeEntropy, NeymanPearsonBoundEmpirical) {
  const CategoricalDist p1 = Dist(0.7, 0.3), p2 = Dist(0.4, 0.6);
  Rng rng(1);
  constexpr int kTrials = 100000;
  int false_alarm = 0, miss = 0;
  for (int i = 0; i < kTrials; ++i) {
    false_alarm += LlrDecide(p1, p2, Draw(p1, rng), 0.0).hypothesis == Hypothesis::kH1;
    miss += LlrDecide(p1, p2, Draw(p2, rng), 0.0).hypothesis == Hypothesis::kH0;
  }
  const double alpha = static_cast<double>(false_alarm) / kTrials;
  const double beta = static_cast<double>(miss) / kTrials;
  EXPECT_LE(BinaryRelativeEntropy(alpha, beta),
            estimators::KlCategorical(p1, p2) + 0.02);
}

TEST(Wald, Boundaries) {
  const WaldBoundaries b = WaldBoundaries::FromErrorRates(0.05, 0.1);
  EXPECT_NEAR(b.upper, std::log(0.95 / 0.1), 1e-15);
  EXPECT_NEAR(b.lower, std::log(0.05 / 0.9), 1e-15);
}

TEST(Wald, SingleMeasurementDecidesImmediately) {
  const CategoricalDist p1 = Dist(0.9, 0.1), p2 = Dist(0.1, 0.9);
  const std::vector<int> stream = {0};
  const WaldResult r = WaldSequential(p1, p2, stream, WaldBoundaries{-1.0, 0.0});
  EXPECT_EQ(r.hypothesis, Hypothesis::kH0);
  EXPECT_EQ(r.stopping_step, 0);
}

TEST(Wald, IdenticalDistributionsStayUndecided) {
  const CategoricalDist p = Dist(0.3, 0.7);
  Rng rng(2);
  std::vector<int> stream(1000);
  for (int& q : stream) q = Draw(p, rng);
  const WaldResult r = WaldSequential(p, p, stream, WaldBoundaries::FromErrorRates(1e-3, 1e-3));
  EXPECT_EQ(r.hypothesis, Hypothesis::kUndecided);
  EXPECT_EQ(r.stopping_step, -1);
}

TEST(Wald, ErrorRatesWithinConfiguration) {
  const CategoricalDist p1 = Dist(0.9, 0.1), p2 = Dist(0.1, 0.9);
  const WaldBoundaries b = WaldBoundaries::FromErrorRates(0.05, 0.05);
  Rng rng(3);
  constexpr int kTrials = 10000;
  int wrong_under_h0 = 0, wrong_under_h1 = 0;
  std::vector<int> stream(200);
  for (int i = 0; i < kTrials; ++i) {
    for (int& q : stream) q = Draw(p1, rng);
    wrong_under_h0 += WaldSequential(p1, p2, stream, b).hypothesis == Hypothesis::kH1;
    for (int& q : stream) q = Draw(p2, rng);
    wrong_under_h1 += WaldSequential(p1, p2, stream, b).hypothesis == Hypothesis::kH0;
  }
  EXPECT_LE(static_cast<double>(wrong_under_h0) / kTrials, 0.05);
  EXPECT_LE(static_cast<double>(wrong_under_h1) / kTrials, 0.05);
}

TEST(Cusum, Examples) {
  DecisionRuleParams p;
  p.reference_mean = 1.5;
  p.drift = 0.5;
  p.threshold = 2.5;
  const std::vector<double> flat(20, 1.5);
  const DetectorVerdict quiet = CusumRun(flat, p);
  EXPECT_FALSE(quiet.attacked);
  EXPECT_EQ(quiet.max_statistic, 0.0);
  const std::vector<double> rising(10, 1.5 + 0.5 + 1.0);
  const DetectorVerdict loud = CusumRun(rising, p);
  ASSERT_TRUE(loud.attacked);
  EXPECT_EQ(*loud.alarm_step, 2);  // third score: S = 1, 2, 3 > 2.5
  EXPECT_FALSE(CusumRun(std::vector<double>{}, p).attacked);
  EXPECT_FALSE(CusumRun(std::vector<double>{}, p).alarm_step.has_value());
}

std::vector<std::vector<double>> RandomEpisodes(Rng& rng, int n) {
  std::vector<std::vector<double>> episodes(n);
  for (auto& e : episodes) {
    e.resize(static_cast<std::size_t>(Uniform(rng, 20, 60)));
    for (double& x : e) x = StdNormal(rng);
  }
  return episodes;
}

TEST(Cusum, CalibrationHitsTargetOnFreshEpisodes) {
  Rng rng(4);
  const DecisionRuleParams p = CalibrateCusum(RandomEpisodes(rng, 2000), 0.03);
  EXPECT_GT(p.threshold, 0.0);
  EXPECT_NEAR(p.drift, 0.5, 0.02);
  const auto fresh = RandomEpisodes(rng, 4000);
  int alarms = 0;
  for (const auto& e : fresh) alarms += CusumRun(e, p).attacked;
  EXPECT_NEAR(static_cast<double>(alarms) / fresh.size(), 0.03, 0.02);
}

TEST(Cusum, FullFprAlarmsEverywhere) {
  Rng rng(5);
  const auto episodes = RandomEpisodes(rng, 200);
  const DecisionRuleParams p = CalibrateCusum(episodes, 1.0);
  double min_max = std::numeric_limits<double>::infinity();
  for (const auto& e : episodes)
    min_max = std::min(min_max, CusumMaxStatistic(e, p.reference_mean, p.drift));
  EXPECT_LE(p.threshold, min_max);
}

TEST(Cusum, DegenerateScores) {
  const std::vector<std::vector<double>> episodes(150, std::vector<double>(30, 2.0));
  const DecisionRuleParams p = CalibrateCusum(episodes, 0.03);
  EXPECT_EQ(p.drift, 0.0);
  EXPECT_EQ(p.threshold, std::nextafter(0.0, 1.0));
  for (const auto& e : episodes) EXPECT_FALSE(CusumRun(e, p).attacked);
}

TEST(Cusum, RaisingThresholdNeverAddsAlarms) {
  Rng rng(6);
  const auto episodes = RandomEpisodes(rng, 500);
  DecisionRuleParams p = CalibrateCusum(episodes, 0.1);
  for (int k = 0; k < 5; ++k) {
    int before = 0, after = 0;
    DecisionRuleParams doubled = p;
    doubled.threshold *= 2.0;
    for (const auto& e : episodes) {
      const bool a = CusumRun(e, p).attacked;
      const bool b = CusumRun(e, doubled).attacked;
      EXPECT_TRUE(a || !b);
      before += a;
      after += b;
    }
    EXPECT_LE(after, before);
    p = doubled;
  }
}

TEST(Cusum, StatisticNonNegative) {
  Rng rng(7);
  for (const auto& e : RandomEpisodes(rng, 50)) {
    EXPECT_GE(CusumMaxStatistic(e, 10.0, 0.0), 0.0);
  }
}

class ScorerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    env_ = envs::MakeEnvironment("pendulum").release();
    Rng rng(8);
    victim_ = new agents::Policy(agents::DefaultVictimDescriptor(*env_), rng);
    const auto train = agents::EvaluateReturn(*env_, *victim_, nullptr, 60, 9).trajectories;
    DynamicsScorerConfig config;
    config.epochs = 20;
    scorer_ = new DynamicsScorer(DynamicsScorer::Train(*env_, train, config));
    for (const auto& traj : train)
      for (double s : scorer_->ScoreEpisode(*env_, traj)) train_scores_.push_back(s);
  }
  static void TearDownTestSuite() {
    delete scorer_;
    delete victim_;
    delete env_;
  }
  static double Mean(const std::vector<double>& v) { return agents::Mean(v); }

  static envs::Environment* env_;
  static agents::Policy* victim_;
  static DynamicsScorer* scorer_;
  static std::vector<double> train_scores_;
};

envs::Environment* ScorerTest::env_ = nullptr;
agents::Policy* ScorerTest::victim_ = nullptr;
DynamicsScorer* ScorerTest::scorer_ = nullptr;
std::vector<double> ScorerTest::train_scores_;

TEST_F(ScorerTest, HeldOutScoresInDistribution) {
  const auto held_out = agents::EvaluateReturn(*env_, *victim_, nullptr, 20, 10).trajectories;
  std::vector<double> scores;
  for (const auto& traj : held_out)
    for (double s : scorer_->ScoreEpisode(*env_, traj)) scores.push_back(s);
  EXPECT_LT(std::abs(Mean(scores) - Mean(train_scores_)), 2.0 * agents::StdDev(train_scores_));
}

TEST_F(ScorerTest, NoiseScoresFarAboveDistribution) {
  auto noisy = agents::EvaluateReturn(*env_, *victim_, nullptr, 20, 11).trajectories;
  Rng rng(12);
  for (auto& traj : noisy)
    for (auto& step : traj.steps)
      for (Eigen::Index k = 0; k < step.observation.size(); ++k)
        step.observation[k] = Uniform(rng, -1.0, 1.0) * env_->spec().observation_scale[k];
  std::vector<double> scores;
  for (const auto& traj : noisy)
    for (double s : scorer_->ScoreEpisode(*env_, traj)) scores.push_back(s);
  EXPECT_GT(Mean(scores), Mean(train_scores_) + 5.0 * agents::StdDev(train_scores_));
}

TEST_F(ScorerTest, JsonRoundTripScoresIdentically) {
  const DynamicsScorer back = DynamicsScorer::FromJson(scorer_->ToJson());
  const auto traj = agents::EvaluateReturn(*env_, *victim_, nullptr, 1, 13).trajectories[0];
  EXPECT_EQ(back.ScoreEpisode(*env_, traj), scorer_->ScoreEpisode(*env_, traj));
}

TEST_F(ScorerTest, DetectorCalibrationAndFpr) {
  const auto few = agents::EvaluateReturn(*env_, *victim_, nullptr, 50, 14).trajectories;
  EXPECT_THROW(Detector::Calibrate(*env_, *scorer_, few, 0.03), std::invalid_argument);
  const auto held_out = agents::EvaluateReturn(*env_, *victim_, nullptr, 1000, 15).trajectories;
  const Detector d = Detector::Calibrate(*env_, *scorer_, held_out, 0.03);
  EXPECT_GE(d.params().drift, 0.0);
  const auto fresh = agents::EvaluateReturn(*env_, *victim_, nullptr, 1000, 16).trajectories;
  int alarms = 0;
  for (const auto& traj : fresh) alarms += d.Judge(*env_, traj).attacked;
  EXPECT_NEAR(alarms / 1000.0, 0.03, 0.02);
  const Detector back = Detector::FromJson(d.ToJson());
  EXPECT_EQ(back.params().threshold, d.params().threshold);
  EXPECT_EQ(back.calibration_hash(), d.calibration_hash());
}

TEST(DynamicsScorer, RefusesInsufficientData) {
  const auto env = envs::MakeEnvironment("cartpole");
  Rng rng(17);
  const agents::Policy v(agents::DefaultVictimDescriptor(*env), rng);
  const auto few = agents::EvaluateReturn(*env, v, nullptr, 2, 18).trajectories;
  EXPECT_THROW(DynamicsScorer::Train(*env, few, DynamicsScorerConfig()), std::invalid_argument);
}

}  // namespace
}  // namespace mirage::detectors
