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

#include "mirage/estimators/kl.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace mirage::estimators {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const envs::OneStepMdp& RequireOneStep(const envs::Environment& env) {
  const auto* mdp = dynamic_cast<const envs::OneStepMdp*>(&env);
  if (mdp == nullptr) {
    throw UnsupportedError("exact enumeration needs the one-step MDP, got '" +
                           env.spec().name + "'");
  }
  return *mdp;
}

void CheckEmission(const Mat& emission, Eigen::Index states) {
  if (emission.rows() != states || emission.cols() != states) {
    throw std::invalid_argument("emission table has the wrong shape");
  }
  for (Eigen::Index s = 0; s < states; ++s) {
    CategoricalDist row(emission.row(s).transpose());
    (void)row;
  }
}

}  // namespace

CategoricalDist::CategoricalDist(Vec probabilities) : p_(std::move(probabilities)) {
  if (p_.size() == 0) throw std::invalid_argument("CategoricalDist: empty");
  if ((p_.array() < 0.0).any() || !p_.allFinite()) {
    throw std::invalid_argument("CategoricalDist: negative or non-finite entry");
  }
  if (std::abs(p_.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("CategoricalDist: entries do not sum to 1");
  }
}

std::string ToString(KlMethod m) {
  switch (m) {
    case KlMethod::kExactEnumeration: return "exact-enumeration";
    case KlMethod::kMcUpperBound: return "mc-upper-bound";
    case KlMethod::kSlidingWindowSurrogate: return "sliding-window-surrogate";
  }
  return "";
}

double KlCategorical(const CategoricalDist& p, const CategoricalDist& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KlCategorical: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

Vec AttackedObservationMarginal(const Vec& initial, const Mat& emission) {
  return emission.transpose() * initial;
}

double ExactObservationKl(const envs::Environment& env, const Mat& emission) {
  const auto& mdp = RequireOneStep(env);
  const Vec p0 = mdp.InitialMean();
  CheckEmission(emission, p0.size());
  return KlCategorical(CategoricalDist(p0),
                       CategoricalDist(AttackedObservationMarginal(p0, emission)));
}

double ExactTrajectoryKl(const envs::Environment& env, const agents::Policy& victim,
                         const Mat& emission) {
  const auto& mdp = RequireOneStep(env);
  const Vec p0 = mdp.InitialMean();
  CheckEmission(emission, p0.size());
  const int n = static_cast<int>(p0.size());
  const int actions = env.spec().action_space.num_actions;
  // Enumerate (s, o, a): the attacked density marginalises s out.
  Mat attacked = Mat::Zero(n, actions);
  Mat unattacked = Mat::Zero(n, actions);
  for (int o = 0; o < n; ++o) {
    const Vec obs = envs::OneStepMdp::OneHot(o);
    for (int a = 0; a < actions; ++a) {
      const double pi = std::exp(victim.LogProb(obs, envs::Action::Discrete(a)));
      for (int s = 0; s < n; ++s) {
        attacked(o, a) += p0[s] * emission(s, o) * pi;
        if (s == o) unattacked(o, a) += p0[s] * pi;
      }
    }
  }
  double kl = 0.0;
  for (int o = 0; o < n; ++o) {
    for (int a = 0; a < actions; ++a) {
      if (unattacked(o, a) == 0.0) continue;
      if (attacked(o, a) == 0.0) return kInf;
      kl += unattacked(o, a) * std::log(unattacked(o, a) / attacked(o, a));
    }
  }
  return kl;
}

double ExactEntropy(const envs::Environment& env) {
  const Vec p0 = RequireOneStep(env).InitialMean();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    if (p0[i] > 0.0) h -= p0[i] * std::log(p0[i]);
  }
  return h;
}

double ExactCrossEntropy(const envs::Environment& env, const Mat& emission) {
  const Vec p0 = RequireOneStep(env).InitialMean();
  CheckEmission(emission, p0.size());
  const Vec q = AttackedObservationMarginal(p0, emission);
  double h = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    if (p0[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    h -= p0[i] * std::log(q[i]);
  }
  return h;
}

StateSampler MarginalStateSampler(const envs::Environment& env,
                                  std::vector<envs::Trajectory> pool) {
  std::map<int, std::vector<Vec>> by_step;
  for (const auto& traj : pool) {
    for (const auto& r : traj.steps) by_step[r.t].push_back(r.state);
  }
  return [&env, by_step = std::move(by_step)](int t, Rng& rng) -> Vec {
    if (t == 0) return env.Reset(rng);
    auto it = by_step.find(t);
    if (it == by_step.end() || it->second.empty()) {
      throw std::out_of_range("MarginalStateSampler: no states at step " +
                              std::to_string(t));
    }
    std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
    return it->second[pick(rng)];
  };
}

KlEstimate McCrossEntropyUpper(const EmissionDensity& attack,
                               std::span<const envs::Trajectory> unattacked,
                               const StateSampler& sampler, int n, Rng& rng) {
  if (n < 1 || static_cast<std::size_t>(n) > unattacked.size()) {
    throw std::invalid_argument("McCrossEntropyUpper: need 1 <= n <= #trajectories");
  }
  std::vector<double> per_traj(n);
  for (int i = 0; i < n; ++i) {
    const auto& steps = unattacked[i].steps;
    double neg_log = 0.0;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const Vec s = sampler(steps[t].t, rng);
      neg_log -= attack.LogDensity(steps[t].observation, s,
                                   std::span(steps.data(), t));
    }
    per_traj[i] = neg_log;
  }
  KlEstimate est;
  est.method = KlMethod::kMcUpperBound;
  est.samples = n;
  double mean = 0.0;
  for (double v : per_traj) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : per_traj) ss += (v - mean) * (v - mean);
  est.value = mean;
  est.standard_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return est;
}

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("SlidingWindow: zero capacity");
}

void SlidingWindow::Push(double value) {
  values_.push_back(value);
  if (values_.size() > capacity_) values_.pop_front();
}

double SlidingKlSurrogate(const SlidingWindow& window) {
  if (window.size() == 0) return 0.0;
  double sum = 0.0;
  for (double v : window.values()) sum += v;
  return sum / static_cast<double>(window.size());
}

}  // namespace mirage::estimators
