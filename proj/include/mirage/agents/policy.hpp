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

#ifndef MIRAGE_AGENTS_POLICY_HPP_
#define MIRAGE_AGENTS_POLICY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/agents/mlp.hpp"
#include "mirage/envs/environment.hpp"

namespace mirage::agents {

enum class Architecture { kTabularSoftmax, kLinearGaussian, kMlp };

std::string ToString(Architecture a);
Architecture ArchitectureFromString(const std::string& s);

struct PolicyDescriptor {
  Architecture architecture = Architecture::kMlp;
  int input_dim = 0;
  std::vector<int> hidden;  // kMlp only
  envs::ActionSpace action_space;
  double initial_log_std = -0.5;  // Gaussian heads only
};

// Stochastic policy over a discrete (softmax) or box (diagonal Gaussian with
// tanh-squashed mean) action space. Tabular policies are bias-free linear
// maps of a one-hot input, so their logits are a plain table lookup.
class Policy {
 public:
  static constexpr double kMinScale = 1e-3;

  Policy() = default;
  Policy(PolicyDescriptor descriptor, Rng& rng);

  const PolicyDescriptor& descriptor() const { return descriptor_; }
  bool discrete() const {
    return descriptor_.action_space.kind == envs::ActionKind::kDiscrete;
  }
  int action_dim() const { return descriptor_.action_space.encoded_dim(); }

  // Flat parameter vector: network weights followed by log standard deviations.
  Vec params() const;
  void set_params(const Vec& params);
  Eigen::Index num_params() const;
  std::uint64_t ParamHash() const;

  // In deterministic mode the policy is a point mass on its mode.
  void set_deterministic(bool d) { deterministic_ = d; }
  bool deterministic() const { return deterministic_; }

  Vec Probabilities(const Vec& observation) const;  // discrete heads
  Vec Mean(const Vec& observation) const;           // Gaussian heads
  Vec Scale() const;                                // Gaussian heads

  envs::Action Sample(const Vec& observation, Rng& rng) const;
  envs::Action Mode(const Vec& observation) const;
  // Log-probability (or log-density); -infinity outside the support.
  double LogProb(const Vec& observation, const envs::Action& action) const;

  // Batched evaluation used by the trainer. Columns of `observations` are
  // samples. Fills per-sample log-probabilities and entropies of the
  // stochastic policy (deterministic mode is ignored here).
  struct Batch {
    Mlp::Cache cache;
    Mat head;  // logits or pre-squash means
    Vec log_prob;
    Vec entropy;
  };
  Batch Evaluate(const Mat& observations,
                 const std::vector<envs::Action>& actions) const;
  // Gradient of sum_i (w_logp[i] * log_prob[i] + w_ent[i] * entropy[i]).
  Vec Gradient(const Batch& batch, const std::vector<envs::Action>& actions,
               const Vec& w_logp, const Vec& w_ent) const;

  const Mlp& net() const { return net_; }

  nlohmann::json ToJson() const;
  static Policy FromJson(const nlohmann::json& j);

 private:
  Vec SquashMean(const Vec& head) const;

  PolicyDescriptor descriptor_;
  Mlp net_;
  Vec log_std_;
  bool deterministic_ = false;
};

nlohmann::json ToJson(const envs::ActionSpace& space);
envs::ActionSpace ActionSpaceFromJson(const nlohmann::json& j);

}  // namespace mirage::agents

#endif  // MIRAGE_AGENTS_POLICY_HPP_
