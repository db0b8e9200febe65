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

#include "mirage/agents/mlp.hpp"

#include <cmath>

namespace mirage::agents {

Mlp::Mlp(std::vector<int> sizes, bool bias) : sizes_(std::move(sizes)), bias_(bias) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two sizes");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    if (bias_) offset += sizes_[l + 1];
  }
  params_ = Vec::Zero(offset);
}

void Mlp::Initialize(Rng& rng, double output_gain) {
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const double gain = (l + 1 == layers) ? output_gain : 1.0;
    const double std = gain / std::sqrt(static_cast<double>(sizes_[l]));
    const Eigen::Index n = static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    for (Eigen::Index i = 0; i < n; ++i) {
      params_[WeightOffset(l) + i] = std * StdNormal(rng);
    }
    if (bias_) params_.segment(BiasOffset(l), sizes_[l + 1]).setZero();
  }
}

Mat Mlp::Forward(const Mat& input, Cache* cache) const {
  const std::size_t layers = sizes_.size() - 1;
  if (cache != nullptr) cache->activations.clear();
  Mat a = input;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::Map<const Mat> w(params_.data() + WeightOffset(l), sizes_[l + 1],
                            sizes_[l]);
    if (cache != nullptr) cache->activations.push_back(a);
    Mat z = w * a;
    if (bias_) {
      z.colwise() += params_.segment(BiasOffset(l), sizes_[l + 1]);
    }
    a = (l + 1 == layers) ? std::move(z) : Mat(z.array().tanh());
  }
  return a;
}

Vec Mlp::Forward(const Vec& input) const { return Forward(Mat(input)).col(0); }

void Mlp::Backward(const Cache& cache, const Mat& grad_output, Vec& grad) const {
  const std::size_t layers = sizes_.size() - 1;
  Mat delta = grad_output;
  for (std::size_t l = layers; l-- > 0;) {
    const Mat& a = cache.activations[l];
    Eigen::Map<Mat> gw(grad.data() + WeightOffset(l), sizes_[l + 1], sizes_[l]);
    gw.noalias() += delta * a.transpose();
    if (bias_) grad.segment(BiasOffset(l), sizes_[l + 1]) += delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Mat> w(params_.data() + WeightOffset(l), sizes_[l + 1],
                              sizes_[l]);
      delta = (w.transpose() * delta).cwiseProduct(
          Mat((1.0 - a.array().square()).matrix()));
    }
  }
}

Adam::Adam(Eigen::Index num_params, AdamConfig config)
    : config_(config), m_(Vec::Zero(num_params)), v_(Vec::Zero(num_params)) {}

void Adam::Step(Vec& params, Vec grad) {
  if (config_.max_grad_norm > 0.0) {
    const double norm = grad.norm();
    if (norm > config_.max_grad_norm) grad *= config_.max_grad_norm / norm;
  }
  ++step_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  params.array() -= config_.learning_rate * (m_.array() / c1) /
                    ((v_.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace mirage::agents
