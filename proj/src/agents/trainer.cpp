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

#include "mirage/agents/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mirage::agents {

void TrainConfig::Validate() const {
  if (total_steps <= 0 || rollout_steps <= 0 || epochs <= 0 || minibatch_size <= 0) {
    throw std::invalid_argument("TrainConfig: step counts must be positive");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (discount < 0.0 || discount >= 1.0) {
    throw std::invalid_argument("TrainConfig: discount must lie in [0, 1)");
  }
  if (gae_lambda < 0.0 || gae_lambda > 1.0) {
    throw std::invalid_argument("TrainConfig: gae_lambda must lie in [0, 1]");
  }
}

nlohmann::json ToJson(const TrainConfig& c) {
  return {{"total_steps", c.total_steps},     {"rollout_steps", c.rollout_steps},
          {"learning_rate", c.learning_rate}, {"discount", c.discount},
          {"gae_lambda", c.gae_lambda},       {"entropy_coef", c.entropy_coef},
          {"epochs", c.epochs},               {"minibatch_size", c.minibatch_size},
          {"clip_ratio", c.clip_ratio},       {"max_grad_norm", c.max_grad_norm},
          {"anneal_learning_rate", c.anneal_learning_rate},
          {"value_hidden", c.value_hidden},   {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.total_steps = j.value("total_steps", c.total_steps);
  c.rollout_steps = j.value("rollout_steps", c.rollout_steps);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.discount = j.value("discount", c.discount);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
  c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.anneal_learning_rate = j.value("anneal_learning_rate", c.anneal_learning_rate);
  c.value_hidden = j.value("value_hidden", c.value_hidden);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

namespace {

struct Rollout {
  Mat observations;
  std::vector<envs::Action> actions;
  Vec log_probs;
  Vec rewards;
  Vec values;
  Vec next_values;  // bootstrap value after each step (0 when terminal)
  std::vector<char> episode_end;
};

}  // namespace

TrainingLog TrainPolicy(EpisodicTask& task, Policy& policy, const TrainConfig& config,
                        const IterationCallback& callback) {
  config.Validate();
  Rng rng(config.seed);
  const int obs_dim = task.ObservationDim();
  if (obs_dim != policy.descriptor().input_dim) {
    throw std::invalid_argument("TrainPolicy: policy input does not match task");
  }

  std::vector<int> value_sizes{obs_dim};
  value_sizes.insert(value_sizes.end(), config.value_hidden.begin(),
                     config.value_hidden.end());
  value_sizes.push_back(1);
  Mlp critic(value_sizes, true);
  critic.Initialize(rng, 1.0);

  AdamConfig adam{config.learning_rate, 0.9, 0.999, 1e-8, config.max_grad_norm};
  Adam actor_opt(policy.num_params(), adam);
  Adam critic_opt(critic.num_params(), adam);

  const bool was_deterministic = policy.deterministic();
  policy.set_deterministic(false);

  TrainingLog log;
  Vec obs = task.Reset(rng);
  double episode_return = 0.0;
  const int n = config.rollout_steps;
  const int iterations =
      static_cast<int>((config.total_steps + n - 1) / n);

  for (int it = 0; it < iterations; ++it) {
    if (config.anneal_learning_rate) {
      const double frac = 1.0 - static_cast<double>(it) / iterations;
      actor_opt.set_learning_rate(config.learning_rate * frac);
      critic_opt.set_learning_rate(config.learning_rate * frac);
    }
    Rollout ro;
    ro.observations.resize(obs_dim, n);
    ro.actions.resize(n);
    ro.log_probs.resize(n);
    ro.rewards.resize(n);
    ro.values.resize(n);
    ro.next_values.resize(n);
    ro.episode_end.assign(n, 0);
    IterationStats stats;
    stats.iteration = it;
    double returns_sum = 0.0;

    for (int i = 0; i < n; ++i) {
      ro.observations.col(i) = obs;
      envs::Action a = policy.Sample(obs, rng);
      ro.log_probs[i] = policy.LogProb(obs, a);
      ro.values[i] = critic.Forward(obs)[0];
      TaskStep step = task.Step(a, rng);
      ro.actions[i] = std::move(a);
      ro.rewards[i] = step.reward;
      episode_return += step.reward;
      const bool end = step.done || step.truncated;
      if (step.done && !step.truncated) {
        ro.next_values[i] = 0.0;
      } else {
        ro.next_values[i] = critic.Forward(step.observation)[0];
      }
      ro.episode_end[i] = end ? 1 : 0;
      if (end) {
        returns_sum += episode_return;
        ++stats.episodes;
        episode_return = 0.0;
        obs = task.Reset(rng);
      } else {
        obs = std::move(step.observation);
      }
    }
    // Bootstrap the unfinished episode at the rollout boundary.
    if (!ro.episode_end[n - 1]) ro.episode_end[n - 1] = 2;

    Vec advantages(n);
    double gae = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      const double delta =
          ro.rewards[i] + config.discount * ro.next_values[i] - ro.values[i];
      if (ro.episode_end[i]) gae = 0.0;
      gae = delta + config.discount * config.gae_lambda * gae;
      advantages[i] = gae;
    }
    const Vec targets = advantages + ro.values;
    const double adv_mean = advantages.mean();
    const double adv_std =
        std::sqrt((advantages.array() - adv_mean).square().mean()) + 1e-8;
    Vec norm_adv = (advantages.array() - adv_mean) / adv_std;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int mb = std::min(config.minibatch_size, n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (int start = 0; start + mb <= n; start += mb) {
        Mat obs_mb(obs_dim, mb);
        std::vector<envs::Action> act_mb(mb);
        Vec adv_mb(mb), old_lp(mb), tgt_mb(mb);
        for (int k = 0; k < mb; ++k) {
          const int idx = order[start + k];
          obs_mb.col(k) = ro.observations.col(idx);
          act_mb[k] = ro.actions[idx];
          adv_mb[k] = norm_adv[idx];
          old_lp[k] = ro.log_probs[idx];
          tgt_mb[k] = targets[idx];
        }
        // Policy: maximise min(ratio * A, clip(ratio) * A) + c * entropy.
        Policy::Batch batch = policy.Evaluate(obs_mb, act_mb);
        Vec w_logp = Vec::Zero(mb);
        for (int k = 0; k < mb; ++k) {
          const double ratio = std::exp(batch.log_prob[k] - old_lp[k]);
          const bool clipped =
              (adv_mb[k] > 0.0 && ratio > 1.0 + config.clip_ratio) ||
              (adv_mb[k] < 0.0 && ratio < 1.0 - config.clip_ratio);
          if (!clipped) w_logp[k] = ratio * adv_mb[k];
        }
        const Vec w_ent = Vec::Constant(mb, config.entropy_coef);
        Vec grad = policy.Gradient(batch, act_mb, w_logp, w_ent) / mb;
        Vec params = policy.params();
        actor_opt.Step(params, -grad);
        policy.set_params(params);

        Mlp::Cache cache;
        const Mat v = critic.Forward(obs_mb, &cache);
        const Mat d_v = (v.row(0).transpose() - tgt_mb).transpose() / mb;
        Vec vgrad = Vec::Zero(critic.num_params());
        critic.Backward(cache, d_v, vgrad);
        critic_opt.Step(critic.params(), vgrad);
      }
    }

    log.steps += n;
    stats.steps = log.steps;
    stats.mean_return = stats.episodes > 0 ? returns_sum / stats.episodes : 0.0;
    log.iterations.push_back(stats);
    if (callback && !callback(stats, policy)) break;
  }
  policy.set_deterministic(was_deterministic);
  return log;
}

}  // namespace mirage::agents
