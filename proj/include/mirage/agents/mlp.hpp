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

#ifndef MIRAGE_AGENTS_MLP_HPP_
#define MIRAGE_AGENTS_MLP_HPP_

#include <vector>

#include "mirage/common.hpp"

namespace mirage::agents {

// Fully connected network with tanh hidden units and a linear output layer.
// Parameters live in one flat vector so optimisers and checkpoints can treat
// them uniformly. Batches are column-major: one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Mat> activations;  // input to each layer
  };

  Mlp() = default;
  Mlp(std::vector<int> sizes, bool bias);

  // Scaled Gaussian initialisation; `output_gain` shrinks the last layer.
  void Initialize(Rng& rng, double output_gain);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  bool bias() const { return bias_; }
  Eigen::Index num_params() const { return params_.size(); }

  const Vec& params() const { return params_; }
  Vec& params() { return params_; }

  Mat Forward(const Mat& input, Cache* cache = nullptr) const;
  Vec Forward(const Vec& input) const;

  // Adds dL/dparams into `grad` for the batch recorded in `cache`.
  void Backward(const Cache& cache, const Mat& grad_output, Vec& grad) const;

 private:
  Eigen::Index WeightOffset(std::size_t layer) const { return offsets_[layer]; }
  Eigen::Index BiasOffset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  std::vector<int> sizes_;
  bool bias_ = true;
  std::vector<Eigen::Index> offsets_;
  Vec params_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index num_params, AdamConfig config);

  // Gradient descent step on `params` (pass the negated gradient to ascend).
  void Step(Vec& params, Vec grad);
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  double learning_rate() const { return config_.learning_rate; }

 private:
  AdamConfig config_;
  Vec m_;
  Vec v_;
  long step_ = 0;
};

}  // namespace mirage::agents

#endif  // MIRAGE_AGENTS_MLP_HPP_
