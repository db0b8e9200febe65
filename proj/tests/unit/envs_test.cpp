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
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "mirage/envs/environment.hpp"
#include "mirage/envs/trajectory.hpp"
#include "test_util.hpp"

namespace mirage::envs {
namespace {

TEST(OneStepMdp, ResetFrequencies) {
  OneStepMdp env;
  Rng rng(1);
  int first = 0;
  constexpr int kN = 30000;
  for (int i = 0; i < kN; ++i) first += OneStepMdp::IndexOf(env.Reset(rng)) == 0;
  EXPECT_NEAR(static_cast<double>(first) / kN, 1.0 / 3.0, 0.01);
}

TEST(OneStepMdp, PayoffsAndTermination) {
  OneStepMdp env;
  Rng rng(0);
  const StepResult r = env.Step(OneStepMdp::OneHot(0), Action::Discrete(0), 0, rng);
  EXPECT_EQ(r.reward, 2.0);
  EXPECT_TRUE(r.done);
  EXPECT_EQ(OneStepMdp::Payoff(1, 1), 0.5);
  EXPECT_EQ(OneStepMdp::Payoff(0, 1), 0.0);
  EXPECT_EQ(OneStepMdp::Payoff(1, 0), 0.0);
  EXPECT_EQ(OneStepMdp::IndexOf(env.TransitionSample(OneStepMdp::OneHot(1), Action::Discrete(1), rng)), -1);
}

// The payoffs are the unique solution of the three return constraints:
// unattacked optimum 1, state swap 0, perfect-illusory scheme 1/6.
TEST(OneStepMdp, PayoffsSolveReturnConstraints) {
  const double p0 = OneStepMdp::kProbFirstState;
  auto ret = [&](const Mat& nu) {
    double total = 0.0;
    for (int s = 0; s < 2; ++s)
      for (int o = 0; o < 2; ++o)
        total += (s == 0 ? p0 : 1 - p0) * nu(s, o) * OneStepMdp::Payoff(s, o);
    return total;
  };
  Mat identity = Mat::Identity(2, 2);
  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  Mat scheme(2, 2);
  scheme << 0, 1, 0.5, 0.5;
  EXPECT_NEAR(ret(identity), 1.0, 1e-12);
  EXPECT_NEAR(ret(swap), 0.0, 1e-12);
  EXPECT_NEAR(ret(scheme), 1.0 / 6.0, 1e-12);
  // Solve for (r11, r22) from the first and third constraints directly.
  Mat a(2, 2);
  a << p0, 1 - p0, 0, 0.5 * (1 - p0);
  Vec b(2);
  b << 1.0, 1.0 / 6.0;
  const Vec r = a.fullPivLu().solve(b);
  EXPECT_NEAR(r[0], 2.0, 1e-12);
  EXPECT_NEAR(r[1], 0.5, 1e-12);
}

TEST(OneStepMdp, InitialMeanIsCategorical) {
  OneStepMdp env;
  EXPECT_NEAR(env.InitialMean()[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(env.InitialMean()[1], 2.0 / 3.0, 1e-15);
}

TEST(CartPole, ResetWithinSupport) {
  CartPole env;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec s = env.Reset(rng);
    EXPECT_LE(s.cwiseAbs().maxCoeff(), 0.05);
  }
  EXPECT_TRUE(env.InitialMean().isZero());
}

TEST(CartPole, PositiveForceAcceleratesRight) {
  CartPole env;
  Rng rng(0);
  const StepResult r = env.Step(Vec::Zero(4), Action::Discrete(1), 0, rng);
  EXPECT_GT(r.state[1], 0.0);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_FALSE(r.done);
}

TEST(CartPole, TerminatesOutsideLimits) {
  CartPole env;
  Rng rng(0);
  Vec s = Vec::Zero(4);
  s[2] = CartPole::kThetaLimit + 0.01;
  EXPECT_TRUE(env.Step(s, Action::Discrete(0), 0, rng).done);
  s.setZero();
  s[0] = CartPole::kXLimit + 0.01;
  EXPECT_TRUE(env.Step(s, Action::Discrete(0), 0, rng).done);
  const StepResult last = env.Step(Vec::Zero(4), Action::Discrete(0), 499, rng);
  EXPECT_TRUE(last.done);
  EXPECT_TRUE(last.truncated);
}

TEST(CartPole, TransitionSampleIsDeterministicAndMatchesStep) {
  CartPole env;
  Rng a(1), b(2);
  Vec s(4);
  s << 0.01, -0.2, 0.03, 0.1;
  const Vec x = env.TransitionSample(s, Action::Discrete(0), a);
  const Vec y = env.TransitionSample(s, Action::Discrete(0), b);
  EXPECT_EQ(x, y);
  EXPECT_EQ(env.Step(s, Action::Discrete(0), 0, a).state, x);
}

TEST(CartPole, RejectsBadAction) {
  CartPole env;
  Rng rng(0);
  EXPECT_THROW(env.Step(Vec::Zero(4), Action::Discrete(2), 0, rng), std::invalid_argument);
}

TEST(Pendulum, ResetThetaDotMean) {
  Pendulum env;
  Rng rng(3);
  double sum = 0.0;
  constexpr int kN = 30000;
  for (int i = 0; i < kN; ++i) sum += env.Reset(rng)[2];
  EXPECT_NEAR(sum / kN, 0.0, 0.02);
}

TEST(Pendulum, UprightIsFixedPoint) {
  Pendulum env;
  Rng rng(0);
  const Vec up = Pendulum::FromAngle(0.0, 0.0);
  const Action zero = Action::Continuous(Vec::Zero(1));
  const StepResult r = env.Step(up, zero, 0, rng);
  EXPECT_NEAR((r.state - up).norm(), 0.0, 1e-15);
  EXPECT_NEAR((env.TransitionSample(up, zero, rng) - up).norm(), 0.0, 1e-15);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Pendulum, RewardWrapsAngleAndClipsTorque) {
  Pendulum env;
  Rng rng(0);
  const Vec s = Pendulum::FromAngle(3.0 * std::numbers::pi / 2.0, 0.5);
  const StepResult r = env.Step(s, Action::Continuous(Vec::Constant(1, 5.0)), 0, rng);
  const double theta = -std::numbers::pi / 2.0;
  EXPECT_NEAR(r.reward, -(theta * theta + 0.1 * 0.25 + 0.001 * 4.0), 1e-12);
}

TEST(Pendulum, EnergyDriftSmallAtFineStep) {
  Pendulum env(200, 1e-4);
  Rng rng(0);
  Vec s = Pendulum::FromAngle(2.0, 0.0);
  const Action zero = Action::Continuous(Vec::Zero(1));
  for (int i = 0; i < 2000; ++i) {
    const Vec next = env.TransitionSample(s, zero, rng);
    const double e0 = Pendulum::Energy(s);
    EXPECT_LT(std::abs(Pendulum::Energy(next) - e0), 1e-3 * std::abs(e0));
    s = next;
  }
}

// Mirroring initial states about the symmetry point leaves their law intact.
TEST(Environments, InitialDistributionSymmetric) {
  for (const char* name : {"cartpole", "pendulum"}) {
    SCOPED_TRACE(name);
    const auto env = MakeEnvironment(name);
    ASSERT_TRUE(env->spec().symmetry_point.has_value());
    const Vec p = *env->spec().symmetry_point;
    Rng rng(7);
    constexpr int kN = 10000;
    const int d = env->spec().state_dim;
    std::vector<std::vector<double>> original(d), mirrored(d);
    for (int i = 0; i < kN; ++i) {
      const Vec s = env->Reset(rng);
      const Vec m = env->Reset(rng);
      const Vec o = 2.0 * p - m;
      for (int k = 0; k < d; ++k) {
        original[k].push_back(s[k]);
        mirrored[k].push_back(o[k]);
      }
    }
    for (int k = 0; k < d; ++k) {
      EXPECT_LT(testing::KsStatistic(original[k], mirrored[k]), testing::KsCritical05(kN, kN));
    }
  }
}

TEST(Environments, StepAndTransitionSampleAgreeUnderSameSeed) {
  Pendulum env;
  Rng init(4);
  const Vec s = env.Reset(init);
  const Action u = Action::Continuous(Vec::Constant(1, 0.7));
  Rng a(9), b(9);
  EXPECT_EQ(env.Step(s, u, 0, a).state, env.TransitionSample(s, u, b));
}

TEST(Environments, ProjectToInitialSupport) {
  CartPole cart;
  Vec s(4);
  s << 0.2, -0.01, -0.3, 0.0;
  Vec expected(4);
  expected << 0.05, -0.01, -0.05, 0.0;
  EXPECT_EQ(cart.ProjectToInitialSupport(s), expected);

  Pendulum pend;
  Vec q(3);
  q << 0.0, 2.0, -3.0;
  const Vec pq = pend.ProjectToInitialSupport(q);
  EXPECT_NEAR(pq[0], 0.0, 1e-15);
  EXPECT_NEAR(pq[1], 1.0, 1e-15);
  EXPECT_EQ(pq[2], -1.0);
  Rng rng(5);
  const Vec inside = pend.Reset(rng);
  EXPECT_NEAR((pend.ProjectToInitialSupport(inside) - inside).norm(), 0.0, 1e-12);
}

TEST(Environments, NamesAndUnknown) {
  for (const auto& name : EnvironmentNames()) EXPECT_EQ(MakeEnvironment(name)->spec().name, name);
  EXPECT_THROW(MakeEnvironment("hopper"), std::invalid_argument);
}

TEST(TrajectoryLog, RoundTrip) {
  CartPole env;
  Trajectory traj;
  Rng rng(6);
  Vec s = env.Reset(rng);
  for (int t = 0; t < 3; ++t) {
    TransitionRecord r;
    r.t = t;
    r.state = s;
    r.observation = s * 0.5;
    r.action = Action::Discrete(t % 2);
    const StepResult step = env.Step(s, r.action, t, rng);
    r.reward = step.reward;
    r.done = step.done;
    traj.steps.push_back(r);
    s = step.state;
  }
  std::stringstream buffer;
  WriteTrajectoryLog(buffer, {env.spec(), 42, "test"}, {traj, traj});
  nlohmann::json header;
  const auto back = ReadTrajectoryLog(buffer, &header);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(header.at("seed").get<std::uint64_t>(), 42u);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    EXPECT_EQ(back[1].steps[t].state, traj.steps[t].state);
    EXPECT_EQ(back[1].steps[t].observation, traj.steps[t].observation);
    EXPECT_EQ(back[1].steps[t].action.index, traj.steps[t].action.index);
  }
  EXPECT_EQ(back[0].Return(), traj.Return());
}

}  // namespace
}  // namespace mirage::envs
