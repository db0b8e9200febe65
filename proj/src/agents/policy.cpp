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

#include "mirage/agents/policy.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace mirage::agents {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> LayerSizes(const PolicyDescriptor& d) {
  std::vector<int> sizes{d.input_dim};
  if (d.architecture == Architecture::kMlp) {
    sizes.insert(sizes.end(), d.hidden.begin(), d.hidden.end());
  }
  sizes.push_back(d.action_space.encoded_dim());
  return sizes;
}

Vec LogSoftmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

}  // namespace

std::string ToString(Architecture a) {
  switch (a) {
    case Architecture::kTabularSoftmax: return "tabular-softmax";
    case Architecture::kLinearGaussian: return "linear-gaussian";
    case Architecture::kMlp: return "mlp";
  }
  return "mlp";
}

Architecture ArchitectureFromString(const std::string& s) {
  if (s == "tabular-softmax") return Architecture::kTabularSoftmax;
  if (s == "linear-gaussian") return Architecture::kLinearGaussian;
  if (s == "mlp") return Architecture::kMlp;
  throw std::invalid_argument("unknown policy architecture '" + s + "'");
}

Policy::Policy(PolicyDescriptor descriptor, Rng& rng)
    : descriptor_(std::move(descriptor)),
      net_(LayerSizes(descriptor_),
           descriptor_.architecture != Architecture::kTabularSoftmax) {
  if (descriptor_.architecture == Architecture::kTabularSoftmax && !discrete()) {
    throw std::invalid_argument("tabular-softmax needs a discrete action space");
  }
  if (descriptor_.architecture == Architecture::kLinearGaussian && discrete()) {
    throw std::invalid_argument("linear-gaussian needs a box action space");
  }
  if (descriptor_.architecture == Architecture::kTabularSoftmax) {
    net_.params().setZero();
  } else {
    net_.Initialize(rng, 0.01);
  }
  if (!discrete()) {
    log_std_ = Vec::Constant(action_dim(), descriptor_.initial_log_std);
  }
}

Vec Policy::params() const {
  Vec p(num_params());
  p << net_.params(), log_std_;
  return p;
}

void Policy::set_params(const Vec& params) {
  if (params.size() != num_params()) {
    throw std::invalid_argument("Policy::set_params: size mismatch");
  }
  net_.params() = params.head(net_.num_params());
  log_std_ = params.tail(log_std_.size());
}

Eigen::Index Policy::num_params() const {
  return net_.num_params() + log_std_.size();
}

std::uint64_t Policy::ParamHash() const {
  const Vec p = params();
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(p.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(p.size()) * sizeof(double); ++i) {
    h = (h ^ bytes[i]) * 1099511628211ULL;
  }
  return h;
}

Vec Policy::SquashMean(const Vec& head) const {
  const auto& s = descriptor_.action_space;
  return 0.5 * (s.high + s.low) +
         (0.5 * (s.high - s.low)).cwiseProduct(Vec(head.array().tanh()));
}

Vec Policy::Probabilities(const Vec& observation) const {
  if (!discrete()) throw UnsupportedError("Probabilities: continuous policy");
  return LogSoftmax(net_.Forward(observation)).array().exp();
}

Vec Policy::Mean(const Vec& observation) const {
  if (discrete()) throw UnsupportedError("Mean: discrete policy");
  return SquashMean(net_.Forward(observation));
}

Vec Policy::Scale() const {
  return log_std_.array().exp().max(kMinScale);
}

envs::Action Policy::Mode(const Vec& observation) const {
  if (discrete()) {
    Eigen::Index best = 0;
    net_.Forward(observation).maxCoeff(&best);
    return envs::Action::Discrete(static_cast<int>(best));
  }
  return envs::Action::Continuous(Mean(observation));
}

envs::Action Policy::Sample(const Vec& observation, Rng& rng) const {
  if (deterministic_) return Mode(observation);
  if (discrete()) {
    const Vec p = Probabilities(observation);
    double u = Uniform(rng, 0.0, 1.0);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      u -= p[i];
      if (u < 0.0) return envs::Action::Discrete(static_cast<int>(i));
    }
    return envs::Action::Discrete(static_cast<int>(p.size() - 1));
  }
  Vec a = Mean(observation);
  const Vec scale = Scale();
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += scale[i] * StdNormal(rng);
  return envs::Action::Continuous(std::move(a));
}

double Policy::LogProb(const Vec& observation, const envs::Action& action) const {
  if (deterministic_) {
    const envs::Action mode = Mode(observation);
    if (discrete()) return mode.index == action.index ? 0.0 : kNegInf;
    return (mode.value - action.value).norm() <= 1e-12 ? 0.0 : kNegInf;
  }
  if (discrete()) {
    if (action.index < 0 || action.index >= action_dim()) return kNegInf;
    return LogSoftmax(net_.Forward(observation))[action.index];
  }
  const Vec z = (action.value - Mean(observation)).cwiseQuotient(Scale());
  return -0.5 * z.squaredNorm() - Scale().array().log().sum() -
         0.5 * std::log(2.0 * std::numbers::pi) * static_cast<double>(z.size());
}

Policy::Batch Policy::Evaluate(const Mat& observations,
                               const std::vector<envs::Action>& actions) const {
  Batch b;
  b.head = net_.Forward(observations, &b.cache);
  const Eigen::Index n = observations.cols();
  b.log_prob.resize(n);
  b.entropy.resize(n);
  if (discrete()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec lp = LogSoftmax(b.head.col(i));
      b.log_prob[i] = lp[actions[i].index];
      b.entropy[i] = -(lp.array().exp() * lp.array()).sum();
    }
    return b;
  }
  const Vec scale = Scale();
  const double log_norm = scale.array().log().sum() +
                          0.5 * std::log(2.0 * std::numbers::pi) *
                              static_cast<double>(scale.size());
  const double entropy = log_norm + 0.5 * static_cast<double>(scale.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec z = (actions[i].value - SquashMean(b.head.col(i))).cwiseQuotient(scale);
    b.log_prob[i] = -0.5 * z.squaredNorm() - log_norm;
    b.entropy[i] = entropy;
  }
  return b;
}

Vec Policy::Gradient(const Batch& batch, const std::vector<envs::Action>& actions,
                     const Vec& w_logp, const Vec& w_ent) const {
  const Eigen::Index n = batch.head.cols();
  Mat d_head(batch.head.rows(), n);
  Vec grad = Vec::Zero(num_params());
  if (discrete()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec lp = LogSoftmax(batch.head.col(i));
      const Vec p = lp.array().exp();
      Vec d = -w_logp[i] * p;
      d[actions[i].index] += w_logp[i];
      d.array() -= w_ent[i] * p.array() * (lp.array() + batch.entropy[i]);
      d_head.col(i) = d;
    }
  } else {
    const Vec scale = Scale();
    const Vec var = scale.cwiseAbs2();
    const Vec half = 0.5 * (descriptor_.action_space.high - descriptor_.action_space.low);
    const Eigen::Index k = scale.size();
    Vec d_log_std = Vec::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec t = batch.head.col(i).array().tanh();
      const Vec mean = SquashMean(batch.head.col(i));
      const Vec diff = actions[i].value - mean;
      const Vec d_mean = w_logp[i] * diff.cwiseQuotient(var);
      d_head.col(i) = d_mean.cwiseProduct(half).cwiseProduct(
          Vec((1.0 - t.array().square()).matrix()));
      d_log_std.array() += w_logp[i] * (diff.array().square() / var.array() - 1.0) +
                           w_ent[i];
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::exp(log_std_[j]) < kMinScale) d_log_std[j] = 0.0;
    }
    grad.tail(k) = d_log_std;
  }
  net_.Backward(batch.cache, d_head, grad);
  return grad;
}

nlohmann::json ToJson(const envs::ActionSpace& space) {
  if (space.kind == envs::ActionKind::kDiscrete) {
    return {{"kind", "discrete"}, {"n", space.num_actions}};
  }
  return {{"kind", "box"},
          {"low", std::vector<double>(space.low.begin(), space.low.end())},
          {"high", std::vector<double>(space.high.begin(), space.high.end())}};
}

envs::ActionSpace ActionSpaceFromJson(const nlohmann::json& j) {
  if (j.at("kind") == "discrete") {
    return envs::ActionSpace::Discrete(j.at("n").get<int>());
  }
  auto lo = j.at("low").get<std::vector<double>>();
  auto hi = j.at("high").get<std::vector<double>>();
  return envs::ActionSpace::Box(Eigen::Map<Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                                Eigen::Map<Vec>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

nlohmann::json Policy::ToJson() const {
  const Vec p = params();
  nlohmann::json j;
  j["architecture"] = agents::ToString(descriptor_.architecture);
  j["input_dim"] = descriptor_.input_dim;
  j["hidden"] = descriptor_.hidden;
  j["action_space"] = agents::ToJson(descriptor_.action_space);
  j["initial_log_std"] = descriptor_.initial_log_std;
  j["deterministic"] = deterministic_;
  j["params"] = std::vector<double>(p.begin(), p.end());
  return j;
}

Policy Policy::FromJson(const nlohmann::json& j) {
  PolicyDescriptor d;
  d.architecture = ArchitectureFromString(j.at("architecture").get<std::string>());
  d.input_dim = j.at("input_dim").get<int>();
  d.hidden = j.at("hidden").get<std::vector<int>>();
  d.action_space = ActionSpaceFromJson(j.at("action_space"));
  d.initial_log_std = j.value("initial_log_std", -0.5);
  Rng rng(0);
  Policy policy(d, rng);
  auto p = j.at("params").get<std::vector<double>>();
  policy.set_params(Eigen::Map<Vec>(p.data(), static_cast<Eigen::Index>(p.size())));
  policy.set_deterministic(j.value("deterministic", false));
  return policy;
}

}  // namespace mirage::agents
