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

#ifndef MIRAGE_ENVS_ENVIRONMENT_HPP_
#define MIRAGE_ENVS_ENVIRONMENT_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/common.hpp"

namespace mirage::envs {

enum class ActionKind { kDiscrete, kContinuous };

struct ActionSpace {
  ActionKind kind = ActionKind::kDiscrete;
  int num_actions = 0;  // discrete only
  Vec low;              // continuous only
  Vec high;

  // Width of the action vector as seen by a network (one-hot for discrete).
  int encoded_dim() const {
    return kind == ActionKind::kDiscrete ? num_actions
                                         : static_cast<int>(low.size());
  }
  static ActionSpace Discrete(int n);
  static ActionSpace Box(Vec low, Vec high);
};

// Either a discrete index or a real vector, depending on the action space.
struct Action {
  int index = 0;
  Vec value;

  static Action Discrete(int i) { return Action{i, Vec()}; }
  static Action Continuous(Vec v) { return Action{0, std::move(v)}; }
};

// One-hot for discrete actions, value scaled into [-1, 1] for boxes.
Vec EncodeAction(const ActionSpace& space, const Action& action);

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  ActionSpace action_space;
  int horizon = 1;
  double discount = 0.99;
  // Point about which the initial distribution is symmetric; absent when
  // the initial distribution has no such symmetry.
  std::optional<Vec> symmetry_point;
  std::string initial_distribution;
  // Per-dimension constant maxima used to normalise observations.
  Vec observation_scale;
};

nlohmann::json ToJson(const EnvSpec& spec);

struct StepResult {
  Vec state;
  double reward = 0.0;
  bool done = false;
  // Set together with `done` when the episode hit the horizon rather than a
  // terminal state.
  bool truncated = false;
};

// Stateless environment: all episode state lives in the caller's vectors,
// which makes the dynamics reusable as the adversary's transition model.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual Vec Reset(Rng& rng) const = 0;
  // `t` is the index of the step being taken; episodes end at t + 1 == horizon.
  virtual StepResult Step(const Vec& state, const Action& action, int t,
                          Rng& rng) const = 0;
  // One draw from p(. | state, action) with reward and termination dropped.
  virtual Vec TransitionSample(const Vec& state, const Action& action,
                               Rng& rng) const = 0;
  virtual Vec InitialMean() const = 0;
  // Nearest point of the support of the initial-state distribution.
  virtual Vec ProjectToInitialSupport(const Vec& state) const = 0;
  virtual bool IsValidState(const Vec& state) const = 0;

  Vec Normalize(const Vec& state) const {
    return state.cwiseQuotient(spec().observation_scale);
  }
  Vec Denormalize(const Vec& observation) const {
    return observation.cwiseProduct(spec().observation_scale);
  }

 protected:
  void CheckAction(const Action& action) const;
};

// Payoffs: r(s1, a1) = 2, r(s2, a2) = 1/2, zero off the diagonal.
class OneStepMdp final : public Environment {
 public:
  static constexpr double kProbFirstState = 1.0 / 3.0;

  OneStepMdp();
  const EnvSpec& spec() const override { return spec_; }
  Vec Reset(Rng& rng) const override;
  StepResult Step(const Vec& state, const Action& action, int t,
                  Rng& rng) const override;
  // Always the terminal sentinel (all zeros): the episode has one step.
  Vec TransitionSample(const Vec& state, const Action& action,
                       Rng& rng) const override;
  Vec InitialMean() const override;
  Vec ProjectToInitialSupport(const Vec& state) const override;
  bool IsValidState(const Vec& state) const override;

  static double Payoff(int state, int action);
  static Vec OneHot(int index);
  // Index of a one-hot state; -1 for the terminal sentinel.
  static int IndexOf(const Vec& state);

 private:
  EnvSpec spec_;
};

class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kXLimit = 2.4;

  explicit CartPole(int horizon = 500);
  const EnvSpec& spec() const override { return spec_; }
  Vec Reset(Rng& rng) const override;
  StepResult Step(const Vec& state, const Action& action, int t,
                  Rng& rng) const override;
  Vec TransitionSample(const Vec& state, const Action& action,
                       Rng& rng) const override;
  Vec InitialMean() const override;
  Vec ProjectToInitialSupport(const Vec& state) const override;
  bool IsValidState(const Vec& state) const override;

 private:
  Vec Integrate(const Vec& state, const Action& action) const;
  EnvSpec spec_;
};

// State is (cos theta, sin theta, theta_dot) with theta = 0 upright.
class Pendulum final : public Environment {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMass = 1.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;

  explicit Pendulum(int horizon = 200, double dt = 0.05);
  const EnvSpec& spec() const override { return spec_; }
  Vec Reset(Rng& rng) const override;
  StepResult Step(const Vec& state, const Action& action, int t,
                  Rng& rng) const override;
  Vec TransitionSample(const Vec& state, const Action& action,
                       Rng& rng) const override;
  Vec InitialMean() const override;
  Vec ProjectToInitialSupport(const Vec& state) const override;
  bool IsValidState(const Vec& state) const override;

  double dt() const { return dt_; }
  // Kinetic plus potential energy; conserved by the unforced dynamics.
  static double Energy(const Vec& state);
  static Vec FromAngle(double theta, double theta_dot);
  static double AngleOf(const Vec& state);

 private:
  Vec Integrate(const Vec& state, double torque) const;
  EnvSpec spec_;
  double dt_;
};

// Recognised names: "one-step", "cartpole", "pendulum".
std::unique_ptr<Environment> MakeEnvironment(std::string_view name);
std::vector<std::string> EnvironmentNames();

}  // namespace mirage::envs

#endif  // MIRAGE_ENVS_ENVIRONMENT_HPP_
