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
#include "mirage/attacks/tabular.hpp"
#include "mirage/estimators/kl.hpp"
#include "test_util.hpp"

namespace mirage::estimators {
namespace {

using attacks::TabularAttack;
using envs::OneStepMdp;

CategoricalDist Dist(std::initializer_list<double> p) {
  Vec v(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) v[i++] = x;
  return CategoricalDist(v);
}

Vec RandomSimplex(Rng& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = e(rng);
  return v / v.sum();
}

Mat RandomEmission(Rng& rng) {
  Mat m(2, 2);
  for (int s = 0; s < 2; ++s) {
    // Keep every entry positive so log densities stay finite.
    const double p = Uniform(rng, 0.05, 0.95);
    m(s, 0) = p;
    m(s, 1) = 1.0 - p;
  }
  return m;
}

TEST(KlCategorical, HandValues) {
  EXPECT_EQ(KlCategorical(Dist({1.0 / 3, 2.0 / 3}), Dist({1.0 / 3, 2.0 / 3})), 0.0);
  EXPECT_NEAR(KlCategorical(Dist({1.0 / 3, 2.0 / 3}), Dist({2.0 / 3, 1.0 / 3})),
              std::log(2.0) / 3.0, 1e-12);
  EXPECT_EQ(KlCategorical(Dist({1.0, 0.0}), Dist({0.0, 1.0})),
            std::numeric_limits<double>::infinity());
  // 0 ln(0 / q) = 0.
  EXPECT_NEAR(KlCategorical(Dist({0.0, 1.0}), Dist({0.5, 0.5})), std::log(2.0), 1e-15);
}

TEST(KlCategorical, NonNegativeAndZeroOnlyOnEquality) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec p = RandomSimplex(rng, 4);
    const Vec q = RandomSimplex(rng, 4);
    EXPECT_GT(KlCategorical(CategoricalDist(p), CategoricalDist(q)), 0.0);
    EXPECT_NEAR(KlCategorical(CategoricalDist(p), CategoricalDist(p)), 0.0, 1e-15);
  }
}

TEST(CategoricalDist, RejectsImproper) {
  EXPECT_THROW(Dist({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Dist({-0.1, 1.1}), std::invalid_argument);
}

TEST(ExactKl, OracleValues) {
  OneStepMdp env;
  const agents::Policy v = testing::GreedyOneStepVictim();
  EXPECT_EQ(ExactTrajectoryKl(env, v, TabularAttack::IdentityEmission()), 0.0);
  EXPECT_NEAR(ExactTrajectoryKl(env, v, TabularAttack::SwapEmission()), std::log(2.0) / 3.0,
              1e-12);
  EXPECT_NEAR(ExactTrajectoryKl(env, v, TabularAttack::PerfectIllusoryEmission()), 0.0, 1e-12);
}

TEST(ExactKl, IdentityIsZeroForEveryVictim) {
  OneStepMdp env;
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    Mat logits = Mat::Random(2, 2) * 3.0;
    const agents::Policy v = testing::TabularPolicy(logits);
    EXPECT_EQ(ExactTrajectoryKl(env, v, TabularAttack::IdentityEmission()), 0.0);
    const Mat nu = RandomEmission(rng);
    EXPECT_NEAR(ExactTrajectoryKl(env, v, nu), ExactObservationKl(env, nu), 1e-12);
  }
}

TEST(ExactKl, CrossEntropyDecomposition) {
  OneStepMdp env;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Mat nu = RandomEmission(rng);
    EXPECT_NEAR(ExactCrossEntropy(env, nu) - ExactEntropy(env), ExactObservationKl(env, nu),
                1e-12);
  }
}

std::vector<envs::Trajectory> UnattackedOneStep(int n, std::uint64_t seed) {
  OneStepMdp env;
  return agents::EvaluateReturn(env, testing::GreedyOneStepVictim(), nullptr, n, seed)
      .trajectories;
}

TEST(McCrossEntropy, ZeroForCertainEmission) {
  OneStepMdp env;
  Mat always_first(2, 2);
  always_first << 1, 0, 1, 0;
  TabularAttack attack(attacks::AttackKind::kEpsilonIllusory, always_first);
  std::vector<envs::Trajectory> pool = UnattackedOneStep(200, 4);
  for (auto& traj : pool)
    for (auto& step : traj.steps) step.observation = OneStepMdp::OneHot(0);
  Rng rng(5);
  const KlEstimate est =
      McCrossEntropyUpper(attack, pool, MarginalStateSampler(env, pool), 200, rng);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.method, KlMethod::kMcUpperBound);
}

// Jensen: sampling the state independently of the observation can only raise
// the expected negative log density.
TEST(McCrossEntropy, UpperBoundsExactCrossEntropy) {
  OneStepMdp env;
  const std::vector<envs::Trajectory> pool = UnattackedOneStep(4000, 6);
  const StateSampler sampler = MarginalStateSampler(env, pool);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Mat nu = RandomEmission(rng);
    TabularAttack attack(attacks::AttackKind::kEpsilonIllusory, nu);
    const KlEstimate est = McCrossEntropyUpper(attack, pool, sampler, 4000, rng);
    EXPECT_GE(est.value, ExactCrossEntropy(env, nu) - 3.0 * est.standard_error) << "attack " << i;
    EXPECT_GE(est.value - ExactEntropy(env), ExactObservationKl(env, nu) - 3.0 * est.standard_error);
  }
}

TEST(McCrossEntropy, StandardErrorScalesAsInverseRoot) {
  OneStepMdp env;
  const std::vector<envs::Trajectory> pool = UnattackedOneStep(8000, 8);
  const StateSampler sampler = MarginalStateSampler(env, pool);
  Mat nu(2, 2);
  nu << 0.7, 0.3, 0.2, 0.8;
  TabularAttack attack(attacks::AttackKind::kEpsilonIllusory, nu);
  Rng rng(9);
  const double se_small = McCrossEntropyUpper(attack, pool, sampler, 2000, rng).standard_error;
  const double se_large = McCrossEntropyUpper(attack, pool, sampler, 8000, rng).standard_error;
  EXPECT_NEAR(se_large / se_small, 0.5, 0.5 * 0.25);
}

TEST(McCrossEntropy, RejectsBadSampleCount) {
  OneStepMdp env;
  const std::vector<envs::Trajectory> pool = UnattackedOneStep(10, 1);
  TabularAttack attack(attacks::AttackKind::kIdentity, TabularAttack::IdentityEmission());
  Rng rng(0);
  EXPECT_THROW(McCrossEntropyUpper(attack, pool, MarginalStateSampler(env, pool), 11, rng),
               std::invalid_argument);
}

TEST(SlidingWindow, SurrogateValues) {
  SlidingWindow w;
  EXPECT_EQ(SlidingKlSurrogate(w), 0.0);
  for (int i = 0; i < 10; ++i) w.Push(0.0);
  EXPECT_EQ(SlidingKlSurrogate(w), 0.0);
  SlidingWindow two;
  two.Push(0.1);
  two.Push(0.3);
  EXPECT_NEAR(SlidingKlSurrogate(two), 0.2, 1e-15);
}

TEST(SlidingWindow, EvictsOldestAtCapacity) {
  SlidingWindow w;
  ASSERT_EQ(w.capacity(), 50u);
  for (int i = 0; i < 51; ++i) w.Push(static_cast<double>(i));
  EXPECT_EQ(w.size(), 50u);
  EXPECT_EQ(w.values().front(), 1.0);
  EXPECT_EQ(w.values().back(), 50.0);
}

TEST(SlidingWindow, OrderInvariant) {
  Rng rng(10);
  std::vector<double> values(50);
  for (double& v : values) v = Uniform(rng, 0.0, 1.0);
  SlidingWindow a, b;
  for (double v : values) a.Push(v);
  std::shuffle(values.begin(), values.end(), rng);
  for (double v : values) b.Push(v);
  EXPECT_NEAR(SlidingKlSurrogate(a), SlidingKlSurrogate(b), 1e-15);
}

}  // namespace
}  // namespace mirage::estimators
