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

#include "mirage/envs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mirage::envs {

ActionSpace ActionSpace::Discrete(int n) {
  ActionSpace s;
  s.kind = ActionKind::kDiscrete;
  s.num_actions = n;
  return s;
}

ActionSpace ActionSpace::Box(Vec low, Vec high) {
  ActionSpace s;
  s.kind = ActionKind::kContinuous;
  s.low = std::move(low);
  s.high = std::move(high);
  return s;
}

Vec EncodeAction(const ActionSpace& space, const Action& action) {
  if (space.kind == ActionKind::kDiscrete) {
    Vec v = Vec::Zero(space.num_actions);
    v[action.index] = 1.0;
    return v;
  }
  Vec mid = 0.5 * (space.high + space.low);
  Vec half = 0.5 * (space.high - space.low);
  return (action.value - mid).cwiseQuotient(half);
}

nlohmann::json ToJson(const EnvSpec& spec) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.begin(), v.end()); };
  nlohmann::json j;
  j["name"] = spec.name;
  j["state_dim"] = spec.state_dim;
  if (spec.action_space.kind == ActionKind::kDiscrete) {
    j["action_space"] = {{"kind", "discrete"},
                         {"n", spec.action_space.num_actions}};
  } else {
    j["action_space"] = {{"kind", "box"},
                         {"low", vec(spec.action_space.low)},
                         {"high", vec(spec.action_space.high)}};
  }
  j["horizon"] = spec.horizon;
  j["discount"] = spec.discount;
  j["symmetry_point"] = spec.symmetry_point
                            ? nlohmann::json(vec(*spec.symmetry_point))
                            : nlohmann::json(nullptr);
  j["initial_distribution"] = spec.initial_distribution;
  j["observation_scale"] = vec(spec.observation_scale);
  return j;
}

void Environment::CheckAction(const Action& action) const {
  const ActionSpace& space = spec().action_space;
  if (space.kind == ActionKind::kDiscrete) {
    if (action.index < 0 || action.index >= space.num_actions) {
      throw std::invalid_argument(spec().name + ": discrete action " +
                                  std::to_string(action.index) +
                                  " out of range");
    }
    return;
  }
  if (action.value.size() != space.low.size()) {
    throw std::invalid_argument(spec().name + ": action has dimension " +
                                std::to_string(action.value.size()) +
                                ", expected " +
                                std::to_string(space.low.size()));
  }
  if (!action.value.allFinite()) {
    throw std::invalid_argument(spec().name + ": non-finite action");
  }
}

// ---------------------------------------------------------------------------
// OneStepMdp

OneStepMdp::OneStepMdp() {
  spec_.name = "one-step";
  spec_.state_dim = 2;
  spec_.action_space = ActionSpace::Discrete(2);
  spec_.horizon = 1;
  spec_.discount = 0.0;
  spec_.initial_distribution = "categorical(1/3, 2/3)";
  spec_.observation_scale = Vec::Ones(2);
}

double OneStepMdp::Payoff(int state, int action) {
  if (state != action) return 0.0;
  return state == 0 ? 2.0 : 0.5;
}

Vec OneStepMdp::OneHot(int index) {
  Vec v = Vec::Zero(2);
  v[index] = 1.0;
  return v;
}

int OneStepMdp::IndexOf(const Vec& state) {
  if (state.size() != 2) return -1;
  if (state[0] == 1.0 && state[1] == 0.0) return 0;
  if (state[0] == 0.0 && state[1] == 1.0) return 1;
  return -1;
}

Vec OneStepMdp::Reset(Rng& rng) const {
  return OneHot(Uniform(rng, 0.0, 1.0) < kProbFirstState ? 0 : 1);
}

StepResult OneStepMdp::Step(const Vec& state, const Action& action, int,
                            Rng&) const {
  CheckAction(action);
  const int s = IndexOf(state);
  if (s < 0) throw std::invalid_argument("one-step: step from terminal state");
  return {Vec::Zero(2), Payoff(s, action.index), true, false};
}

Vec OneStepMdp::TransitionSample(const Vec&, const Action& action,
                                 Rng&) const {
  CheckAction(action);
  return Vec::Zero(2);
}

Vec OneStepMdp::InitialMean() const {
  Vec p(2);
  p << kProbFirstState, 1.0 - kProbFirstState;
  return p;
}

Vec OneStepMdp::ProjectToInitialSupport(const Vec& state) const {
  Eigen::Index best = 0;
  state.maxCoeff(&best);
  return OneHot(static_cast<int>(best));
}

bool OneStepMdp::IsValidState(const Vec& state) const {
  return IndexOf(state) >= 0;
}

// ---------------------------------------------------------------------------
// CartPole

CartPole::CartPole(int horizon) {
  spec_.name = "cartpole";
  spec_.state_dim = 4;
  spec_.action_space = ActionSpace::Discrete(2);
  spec_.horizon = horizon;
  spec_.discount = 0.99;
  spec_.symmetry_point = Vec::Zero(4);
  spec_.initial_distribution = "uniform[-0.05, 0.05]^4";
  spec_.observation_scale = Vec(4);
  spec_.observation_scale << 2 * kXLimit, 3.0, 2 * kThetaLimit, 3.5;
}

Vec CartPole::Reset(Rng& rng) const {
  Vec s(4);
  for (int i = 0; i < 4; ++i) s[i] = Uniform(rng, -0.05, 0.05);
  return s;
}

Vec CartPole::Integrate(const Vec& state, const Action& action) const {
  constexpr double kTotalMass = kCartMass + kPoleMass;
  constexpr double kPoleMassLength = kPoleMass * kHalfLength;
  const double x = state[0], x_dot = state[1];
  const double theta = state[2], theta_dot = state[3];
  const double force = action.index == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
  Vec next(4);
  next << x + kDt * x_dot, x_dot + kDt * x_acc, theta + kDt * theta_dot,
      theta_dot + kDt * theta_acc;
  return next;
}

StepResult CartPole::Step(const Vec& state, const Action& action, int t,
                          Rng&) const {
  CheckAction(action);
  Vec next = Integrate(state, action);
  const bool fallen =
      std::abs(next[0]) > kXLimit || std::abs(next[2]) > kThetaLimit;
  const bool timeout = t + 1 >= spec_.horizon;
  return {std::move(next), 1.0, fallen || timeout, timeout && !fallen};
}

Vec CartPole::TransitionSample(const Vec& state, const Action& action,
                               Rng&) const {
  CheckAction(action);
  return Integrate(state, action);
}

Vec CartPole::InitialMean() const { return Vec::Zero(4); }

Vec CartPole::ProjectToInitialSupport(const Vec& state) const {
  return state.cwiseMax(-0.05).cwiseMin(0.05);
}

bool CartPole::IsValidState(const Vec& state) const {
  return state.size() == 4 && state.allFinite();
}

// ---------------------------------------------------------------------------
// Pendulum

namespace {

double WrapAngle(double theta) {
  return std::remainder(theta, 2.0 * std::numbers::pi);
}

}  // namespace

Pendulum::Pendulum(int horizon, double dt) : dt_(dt) {
  spec_.name = "pendulum";
  spec_.state_dim = 3;
  spec_.action_space =
      ActionSpace::Box(Vec::Constant(1, -kMaxTorque), Vec::Constant(1, kMaxTorque));
  spec_.horizon = horizon;
  spec_.discount = 0.99;
  spec_.symmetry_point = Vec::Zero(3);
  spec_.initial_distribution = "theta ~ U[-pi, pi], theta_dot ~ U[-1, 1]";
  spec_.observation_scale = Vec(3);
  spec_.observation_scale << 1.0, 1.0, kMaxSpeed;
}

Vec Pendulum::FromAngle(double theta, double theta_dot) {
  Vec s(3);
  s << std::cos(theta), std::sin(theta), theta_dot;
  return s;
}

double Pendulum::AngleOf(const Vec& state) {
  return std::atan2(state[1], state[0]);
}

double Pendulum::Energy(const Vec& state) {
  const double inertia = kMass * kLength * kLength / 3.0;
  return 0.5 * inertia * state[2] * state[2] +
         kMass * kGravity * 0.5 * kLength * state[0];
}

Vec Pendulum::Reset(Rng& rng) const {
  const double theta = Uniform(rng, -std::numbers::pi, std::numbers::pi);
  return FromAngle(theta, Uniform(rng, -1.0, 1.0));
}

// Semi-implicit Euler, as in the classic-control reference implementation.
Vec Pendulum::Integrate(const Vec& state, double torque) const {
  const double theta = AngleOf(state);
  double theta_dot = state[2] + (3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                                 3.0 / (kMass * kLength * kLength) * torque) *
                                    dt_;
  theta_dot = std::clamp(theta_dot, -kMaxSpeed, kMaxSpeed);
  return FromAngle(theta + theta_dot * dt_, theta_dot);
}

StepResult Pendulum::Step(const Vec& state, const Action& action, int t,
                          Rng&) const {
  CheckAction(action);
  const double u = std::clamp(action.value[0], -kMaxTorque, kMaxTorque);
  const double theta = WrapAngle(AngleOf(state));
  const double cost =
      theta * theta + 0.1 * state[2] * state[2] + 0.001 * u * u;
  const bool timeout = t + 1 >= spec_.horizon;
  return {Integrate(state, u), -cost, timeout, timeout};
}

Vec Pendulum::TransitionSample(const Vec& state, const Action& action,
                               Rng&) const {
  CheckAction(action);
  return Integrate(state, std::clamp(action.value[0], -kMaxTorque, kMaxTorque));
}

Vec Pendulum::InitialMean() const { return Vec::Zero(3); }

Vec Pendulum::ProjectToInitialSupport(const Vec& state) const {
  const double r = std::hypot(state[0], state[1]);
  Vec out(3);
  if (r == 0.0) {
    out << 1.0, 0.0, 0.0;
  } else {
    out << state[0] / r, state[1] / r, 0.0;
  }
  out[2] = std::clamp(state[2], -1.0, 1.0);
  return out;
}

bool Pendulum::IsValidState(const Vec& state) const {
  return state.size() == 3 && state.allFinite() &&
         std::abs(state[0] * state[0] + state[1] * state[1] - 1.0) < 1e-9;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Environment> MakeEnvironment(std::string_view name) {
  if (name == "one-step") return std::make_unique<OneStepMdp>();
  if (name == "cartpole") return std::make_unique<CartPole>();
  if (name == "pendulum") return std::make_unique<Pendulum>();
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

std::vector<std::string> EnvironmentNames() {
  return {"one-step", "cartpole", "pendulum"};
}

}  // namespace mirage::envs
