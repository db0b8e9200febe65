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

#include "mirage/detectors/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "mirage/agents/policy.hpp"

namespace mirage::detectors {
namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

Vec Input(const envs::ActionSpace& space, const Vec& observation, const envs::Action& action) {
  const Vec a = envs::EncodeAction(space, action);
  Vec x(observation.size() + a.size());
  x << observation, a;
  return x;
}

Vec ColumnSpread(const Mat& m) {
  Vec s(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mean = m.row(i).mean();
    s[i] = std::sqrt((m.row(i).array() - mean).square().mean());
  }
  return s;
}

Vec FloorScale(Vec s) {
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = s[i] > 1e-12 ? s[i] : 1.0;
  return s;
}

void HashBytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void HashVec(std::uint64_t& h, const Vec& v) {
  HashBytes(h, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

std::vector<double> ToStd(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec FromStd(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json ToJson(const DynamicsScorerConfig& c) {
  return {{"hidden", c.hidden},
          {"epochs", c.epochs},
          {"minibatch_size", c.minibatch_size},
          {"learning_rate", c.learning_rate},
          {"min_transitions", c.min_transitions},
          {"seed", c.seed}};
}

DynamicsScorerConfig DynamicsScorerConfigFromJson(const nlohmann::json& j) {
  DynamicsScorerConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.min_transitions = j.value("min_transitions", c.min_transitions);
  c.seed = j.value("seed", c.seed);
  if (c.epochs < 1 || c.minibatch_size < 1 || !(c.learning_rate > 0.0)) {
    throw std::invalid_argument("DynamicsScorerConfig: epochs, minibatch and rate must be positive");
  }
  return c;
}

long CountTransitions(std::span<const envs::Trajectory> trajectories) {
  long n = 0;
  for (const auto& traj : trajectories) {
    if (traj.size() > 1) n += static_cast<long>(traj.size()) - 1;
  }
  return n;
}

std::uint64_t DatasetHash(std::span<const envs::Trajectory> trajectories) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& traj : trajectories) {
    const std::uint64_t len = traj.size();
    HashBytes(h, &len, sizeof(len));
    for (const auto& rec : traj.steps) {
      HashVec(h, rec.observation);
      HashBytes(h, &rec.action.index, sizeof(rec.action.index));
      HashVec(h, rec.action.value);
      HashBytes(h, &rec.reward, sizeof(rec.reward));
    }
  }
  return h;
}

DynamicsScorer DynamicsScorer::Train(const envs::Environment& env,
                                     std::span<const envs::Trajectory> unattacked,
                                     const DynamicsScorerConfig& config) {
  const long n = CountTransitions(unattacked);
  if (n < config.min_transitions || n < 2) {
    throw std::invalid_argument("DynamicsScorer: " + std::to_string(n) +
                                " transitions, need at least " +
                                std::to_string(config.min_transitions));
  }
  DynamicsScorer scorer;
  scorer.action_space_ = env.spec().action_space;
  scorer.training_transitions_ = n;
  const int d = env.spec().state_dim;
  const int in_dim = d + scorer.action_space_.encoded_dim();

  Mat x(in_dim, n);
  Mat y(d, n);
  long k = 0;
  for (const auto& traj : unattacked) {
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      const Vec o = env.Normalize(traj.steps[t].observation);
      const Vec next = env.Normalize(traj.steps[t + 1].observation);
      x.col(k) = Input(scorer.action_space_, o, traj.steps[t].action);
      y.col(k) = next - o;
      ++k;
    }
  }
  scorer.input_scale_ = FloorScale(ColumnSpread(x));
  scorer.target_scale_ = FloorScale(ColumnSpread(y));
  const Mat xs = scorer.input_scale_.cwiseInverse().asDiagonal() * x;
  const Mat ys = scorer.target_scale_.cwiseInverse().asDiagonal() * y;

  std::vector<int> sizes{in_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(d);
  scorer.net_ = agents::Mlp(sizes, true);
  Rng rng(DeriveSeed(config.seed, 0xd1a));
  scorer.net_.Initialize(rng, 1.0);
  agents::Adam opt(scorer.net_.num_params(), {config.learning_rate, 0.9, 0.999, 1e-8, 0.0});

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  const long mb = std::min<long>(config.minibatch_size, n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (long start = 0; start + mb <= n; start += mb) {
      Mat bx(in_dim, mb);
      Mat by(d, mb);
      for (long i = 0; i < mb; ++i) {
        bx.col(i) = xs.col(order[start + i]);
        by.col(i) = ys.col(order[start + i]);
      }
      agents::Mlp::Cache cache;
      const Mat pred = scorer.net_.Forward(bx, &cache);
      const Mat grad_out = (pred - by) / static_cast<double>(mb);
      Vec grad = Vec::Zero(scorer.net_.num_params());
      scorer.net_.Backward(cache, grad_out, grad);
      opt.Step(scorer.net_.params(), grad);
    }
  }

  const Mat residual = scorer.target_scale_.asDiagonal() * (ys - scorer.net_.Forward(xs));
  scorer.sigma_ = residual.rowwise().squaredNorm().cwiseQuotient(Vec::Constant(d, n)).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    scorer.sigma_[i] = std::max(scorer.sigma_[i], 1e-9 * scorer.target_scale_[i]);
  }
  return scorer;
}

Vec DynamicsScorer::Predict(const Vec& observation, const envs::Action& action) const {
  const Vec x = Input(action_space_, observation, action).cwiseQuotient(input_scale_);
  return observation + target_scale_.cwiseProduct(net_.Forward(x));
}

double DynamicsScorer::Score(const Vec& observation, const envs::Action& action,
                             const Vec& next_observation) const {
  const Vec z = (next_observation - Predict(observation, action)).cwiseQuotient(sigma_);
  return 0.5 * z.squaredNorm() + sigma_.array().log().sum() +
         0.5 * kLogTwoPi * static_cast<double>(sigma_.size());
}

std::vector<double> DynamicsScorer::ScoreEpisode(const envs::Environment& env,
                                                 const envs::Trajectory& trajectory) const {
  std::vector<double> scores;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    scores.push_back(Score(env.Normalize(trajectory.steps[t].observation),
                           trajectory.steps[t].action,
                           env.Normalize(trajectory.steps[t + 1].observation)));
  }
  return scores;
}

nlohmann::json DynamicsScorer::ToJson() const {
  return {{"action_space", agents::ToJson(action_space_)},
          {"sizes", net_.sizes()},
          {"params", ToStd(net_.params())},
          {"input_scale", ToStd(input_scale_)},
          {"target_scale", ToStd(target_scale_)},
          {"sigma", ToStd(sigma_)},
          {"training_transitions", training_transitions_}};
}

DynamicsScorer DynamicsScorer::FromJson(const nlohmann::json& j) {
  DynamicsScorer s;
  s.action_space_ = agents::ActionSpaceFromJson(j.at("action_space"));
  s.net_ = agents::Mlp(j.at("sizes").get<std::vector<int>>(), true);
  const Vec params = FromStd(j.at("params").get<std::vector<double>>());
  if (params.size() != s.net_.num_params()) {
    throw std::invalid_argument("DynamicsScorer: parameter count does not match layer sizes");
  }
  s.net_.params() = params;
  s.input_scale_ = FromStd(j.at("input_scale").get<std::vector<double>>());
  s.target_scale_ = FromStd(j.at("target_scale").get<std::vector<double>>());
  s.sigma_ = FromStd(j.at("sigma").get<std::vector<double>>());
  s.training_transitions_ = j.at("training_transitions").get<long>();
  return s;
}

}  // namespace mirage::detectors
