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

#include "mirage/agents/victim.hpp"

#include <cmath>
#include <sstream>

namespace mirage::agents {

Vec VictimTask::Reset(Rng& rng) {
  state_ = env_.Reset(rng);
  t_ = 0;
  return env_.Normalize(state_);
}

TaskStep VictimTask::Step(const envs::Action& action, Rng& rng) {
  envs::StepResult r = env_.Step(state_, action, t_, rng);
  ++t_;
  state_ = std::move(r.state);
  return {env_.Normalize(state_), r.reward, r.done, r.truncated};
}

CompetenceThreshold DefaultCompetence(const std::string& env_name) {
  if (env_name == "one-step") return {1.0, 1};
  if (env_name == "cartpole") return {450.0, 200};
  if (env_name == "pendulum") return {-250.0, 200};
  throw std::invalid_argument("no competence threshold for '" + env_name + "'");
}

PolicyDescriptor DefaultVictimDescriptor(const envs::Environment& env) {
  PolicyDescriptor d;
  d.input_dim = env.spec().state_dim;
  d.action_space = env.spec().action_space;
  if (env.spec().name == "one-step") {
    d.architecture = Architecture::kTabularSoftmax;
  } else {
    d.architecture = Architecture::kMlp;
    d.hidden = {32, 32};
    d.initial_log_std = 0.0;
  }
  return d;
}

TrainConfig DefaultVictimConfig(const std::string& env_name) {
  TrainConfig c;
  if (env_name == "one-step") {
    c.total_steps = 20000;
    c.rollout_steps = 200;
    c.learning_rate = 0.05;
    c.discount = 0.0;
    c.gae_lambda = 1.0;
    c.epochs = 1;
    c.minibatch_size = 200;
    c.value_hidden = {};
  } else if (env_name == "cartpole") {
    c.total_steps = 300000;
    c.rollout_steps = 2048;
    c.learning_rate = 1e-3;
    c.discount = 0.99;
    c.epochs = 10;
    c.minibatch_size = 64;
  } else if (env_name == "pendulum") {
    c.total_steps = 1000000;
    c.rollout_steps = 2048;
    c.learning_rate = 1e-3;
    c.discount = 0.95;
    c.gae_lambda = 0.95;
    c.epochs = 10;
    c.minibatch_size = 64;
  }
  return c;
}

double ExactOneStepReturn(const Policy& victim) {
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double p_s = s == 0 ? envs::OneStepMdp::kProbFirstState
                              : 1.0 - envs::OneStepMdp::kProbFirstState;
    const Vec obs = envs::OneStepMdp::OneHot(s);
    for (int a = 0; a < 2; ++a) {
      const double lp = victim.LogProb(obs, envs::Action::Discrete(a));
      total += p_s * std::exp(lp) * envs::OneStepMdp::Payoff(s, a);
    }
  }
  return total;
}

Policy TrainVictim(const envs::Environment& env, const TrainConfig& config,
                   VictimReport* report) {
  Rng init_rng(DeriveSeed(config.seed, 0x71c7));
  Policy policy(DefaultVictimDescriptor(env), init_rng);
  const std::string& name = env.spec().name;
  const CompetenceThreshold threshold = DefaultCompetence(name);
  VictimTask task(env);
  VictimReport local;

  auto competent = [&](const Policy& p) {
    if (name == "one-step") {
      Policy greedy = p;
      greedy.set_deterministic(true);
      local.evaluation_mean = ExactOneStepReturn(greedy);
      local.evaluation_stddev = 0.0;
      return std::abs(local.evaluation_mean - threshold.min_mean_return) < 1e-12;
    }
    const EvaluationResult r = EvaluateReturn(env, p, nullptr, threshold.episodes,
                                              DeriveSeed(config.seed, 0xe7a1), false);
    local.evaluation_mean = r.mean;
    local.evaluation_stddev = r.stddev;
    return r.mean >= threshold.min_mean_return;
  };

  // For the continuous tasks, a full competence check is only worth running
  // once the training episodes themselves are close to the threshold.
  const double screen = name == "cartpole"   ? 0.9 * threshold.min_mean_return
                        : name == "pendulum" ? threshold.min_mean_return - 60.0
                                             : -1e300;
  TrainingLog log = TrainPolicy(task, policy, config,
                                [&](const IterationStats& s, const Policy& p) {
                                  if (name == "one-step") return true;
                                  if (s.episodes == 0 || s.mean_return < screen) return true;
                                  local.competent = competent(p);
                                  return !local.competent;
                                });
  local.steps = log.steps;
  if (!local.competent) local.competent = competent(policy);
  if (report != nullptr) *report = local;
  if (!local.competent) {
    std::ostringstream msg;
    msg << "victim training on " << name << " did not reach mean return "
        << threshold.min_mean_return << " within " << log.steps
        << " steps (evaluated " << local.evaluation_mean << ")";
    throw TrainingFailure(msg.str());
  }
  return policy;
}

}  // namespace mirage::agents
