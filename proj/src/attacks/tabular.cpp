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

#include "mirage/attacks/tabular.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mirage/agents/mlp.hpp"

namespace mirage::attacks {
namespace {

using envs::OneStepMdp;

const OneStepMdp& RequireOneStep(const envs::Environment& env) {
  const auto* one_step = dynamic_cast<const OneStepMdp*>(&env);
  if (one_step == nullptr) {
    throw UnsupportedError("tabular attacks need the one-step MDP, got '" +
                           env.spec().name + "'");
  }
  return *one_step;
}

Vec InitialProbabilities() {
  return Vec{{OneStepMdp::kProbFirstState, 1.0 - OneStepMdp::kProbFirstState}};
}

Mat SoftmaxRows(const Mat& logits) {
  Mat p(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const Vec e = (logits.row(s).array() - logits.row(s).maxCoeff()).exp();
    p.row(s) = e.transpose() / e.sum();
  }
  return p;
}

// g(s, o) = sum_a pi(a | o) r(s, a).
Mat ObservedPayoff(const agents::Policy& victim) {
  Mat g = Mat::Zero(2, 2);
  for (int o = 0; o < 2; ++o) {
    const Vec obs = OneStepMdp::OneHot(o);
    for (int a = 0; a < 2; ++a) {
      const double pi = std::exp(victim.LogProb(obs, envs::Action::Discrete(a)));
      for (int s = 0; s < 2; ++s) g(s, o) += pi * OneStepMdp::Payoff(s, a);
    }
  }
  return g;
}

}  // namespace

TabularAttack::TabularAttack(AttackKind kind, Mat emission)
    : kind_(kind), emission_(std::move(emission)) {
  if (emission_.rows() != 2 || emission_.cols() != 2) {
    throw std::invalid_argument("TabularAttack: emission must be 2x2");
  }
  for (Eigen::Index s = 0; s < 2; ++s) estimators::CategoricalDist(emission_.row(s).transpose());
}

Mat TabularAttack::IdentityEmission() { return Mat::Identity(2, 2); }

Mat TabularAttack::SwapEmission() { return Mat{{0.0, 1.0}, {1.0, 0.0}}; }

Mat TabularAttack::PerfectIllusoryEmission() { return Mat{{0.0, 1.0}, {0.5, 0.5}}; }

Vec TabularAttack::Emit(const Vec& normalized_state, int, Rng& rng) {
  const int s = OneStepMdp::IndexOf(normalized_state);
  if (s < 0) return normalized_state;
  const int o = Uniform(rng, 0.0, 1.0) < emission_(s, 0) ? 0 : 1;
  return OneStepMdp::OneHot(o);
}

double TabularAttack::LogDensity(const Vec& observation, const Vec& state,
                                 std::span<const envs::TransitionRecord>) const {
  const int s = OneStepMdp::IndexOf(state);
  const int o = OneStepMdp::IndexOf(observation);
  if (s < 0 || o < 0) throw std::invalid_argument("TabularAttack: not a one-step state");
  const double p = emission_(s, o);
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

nlohmann::json TabularAttack::ToJson() const {
  return {{"kind", attacks::ToString(kind_)},
          {"env", "one-step"},
          {"emission", {{emission_(0, 0), emission_(0, 1)}, {emission_(1, 0), emission_(1, 1)}}},
          {"final_lambda", final_lambda},
          {"measured_kl", measured_kl}};
}

TabularAttack TabularAttack::FromJson(const nlohmann::json& j) {
  const auto rows = j.at("emission").get<std::vector<std::vector<double>>>();
  if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
    throw std::invalid_argument("TabularAttack: emission must be 2x2");
  }
  TabularAttack attack(AttackKindFromString(j.at("kind").get<std::string>()),
                       Mat{{rows[0][0], rows[0][1]}, {rows[1][0], rows[1][1]}});
  attack.final_lambda = j.value("final_lambda", 0.0);
  attack.measured_kl = j.value("measured_kl", 0.0);
  return attack;
}

double ExactAttackedReturn(const agents::Policy& victim, const Mat& emission) {
  const Vec p0 = InitialProbabilities();
  const Mat g = ObservedPayoff(victim);
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int o = 0; o < 2; ++o) total += p0[s] * emission(s, o) * g(s, o);
  }
  return total;
}

ExactDualResult TrainEpsilonIllusoryExact(const envs::Environment& env,
                                          const agents::Policy& victim, double epsilon,
                                          const DualConfig& dual_config,
                                          const ExactDualConfig& config) {
  RequireOneStep(env);
  if (!(epsilon >= 0.0)) throw std::invalid_argument("TrainEpsilonIllusoryExact: epsilon < 0");
  if (config.outer_iterations < 1 || config.inner_steps < 1) {
    throw std::invalid_argument("TrainEpsilonIllusoryExact: iteration counts must be >= 1");
  }
  const Vec p0 = InitialProbabilities();
  const Mat g = ObservedPayoff(victim);

  DualState dual;
  dual.lambda = config.unconstrained ? 0.0 : dual_config.initial_lambda;
  dual.epsilon = epsilon;
  dual.step_size = dual_config.step_size;

  Vec theta = Vec::Zero(4);  // row-major logits of nu
  agents::Adam adam(4, agents::AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8, 0.0});
  ExactDualResult result;

  auto emission_of = [](const Vec& th) {
    return SoftmaxRows(Mat{{th[0], th[1]}, {th[2], th[3]}});
  };

  for (int k = 0; k < config.outer_iterations; ++k) {
    for (int i = 0; i < config.inner_steps; ++i) {
      const Mat nu = emission_of(theta);
      const Vec q = estimators::AttackedObservationMarginal(p0, nu);
      // d/dnu(o|s) of E[R] + lambda * KL(p0 || q).
      Mat dnu(2, 2);
      for (int s = 0; s < 2; ++s) {
        for (int o = 0; o < 2; ++o) {
          dnu(s, o) = p0[s] * g(s, o) - dual.lambda * p0[s] * p0[o] / q[o];
        }
      }
      Vec grad(4);
      for (int s = 0; s < 2; ++s) {
        const double mean = nu.row(s).dot(dnu.row(s));
        for (int o = 0; o < 2; ++o) grad[2 * s + o] = nu(s, o) * (dnu(s, o) - mean);
      }
      adam.Step(theta, grad);
    }
    const Mat nu = emission_of(theta);
    const double kl = estimators::ExactObservationKl(env, nu);
    if (!config.unconstrained) {
      dual = DualUpdate(dual, kl);
      if (dual.lambda > dual_config.lambda_cap) {
        throw TrainingFailure("exact dual ascent diverged: lambda exceeds cap");
      }
    }
    result.trace.emplace_back(dual.lambda, kl);
  }
  result.emission = emission_of(theta);
  result.lambda = dual.lambda;
  result.kl = estimators::ExactObservationKl(env, result.emission);
  result.victim_return = ExactAttackedReturn(victim, result.emission);
  return result;
}

}  // namespace mirage::attacks
