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

#ifndef MIRAGE_ESTIMATORS_KL_HPP_
#define MIRAGE_ESTIMATORS_KL_HPP_

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mirage/agents/policy.hpp"
#include "mirage/envs/trajectory.hpp"

// All divergences are in nats.
namespace mirage::estimators {

// A probability vector: entries >= 0 summing to 1 (within 1e-9).
class CategoricalDist {
 public:
  explicit CategoricalDist(Vec probabilities);
  const Vec& probabilities() const { return p_; }
  double operator[](Eigen::Index i) const { return p_[i]; }
  Eigen::Index size() const { return p_.size(); }

 private:
  Vec p_;
};

enum class KlMethod { kExactEnumeration, kMcUpperBound, kSlidingWindowSurrogate };
std::string ToString(KlMethod m);

struct KlEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  long samples = 0;
  KlMethod method = KlMethod::kExactEnumeration;
};

// sum_i p_i ln(p_i / q_i) with 0 ln(0/.) = 0; +infinity when p_i > 0 = q_i.
double KlCategorical(const CategoricalDist& p, const CategoricalDist& q);

// Observation marginal the victim sees on the one-step MDP when the initial
// state is drawn from `initial` and then rewritten by `emission`
// (row s holds nu(. | s)).
Vec AttackedObservationMarginal(const Vec& initial, const Mat& emission);

// KL(unattacked || attacked) over the victim's (observation, action) pairs on
// the one-step MDP, by enumeration over (s, o, a). The victim factor
// pi(a | o) is common to both densities and drops out, so the result equals
// the KL between observation marginals; it is kept here so the enumeration
// matches the trajectory densities term for term.
double ExactTrajectoryKl(const envs::Environment& env, const agents::Policy& victim,
                         const Mat& emission);

// Same divergence computed on the observation marginals only.
double ExactObservationKl(const envs::Environment& env, const Mat& emission);

// Exact H[rho_v] and H[rho_v, rho_v(nu)] on the one-step MDP (observation
// marginals; the victim factor cancels in their difference).
double ExactEntropy(const envs::Environment& env);
double ExactCrossEntropy(const envs::Environment& env, const Mat& emission);

// log nu(o_t | s_t, o_<t, a_<t) for an attack whose emission density is
// tractable. Arguments are in raw state units.
class EmissionDensity {
 public:
  virtual ~EmissionDensity() = default;
  virtual double LogDensity(const Vec& observation, const Vec& state,
                            std::span<const envs::TransitionRecord> history) const = 0;
};

// Draws s_t for the Monte-Carlo bound: s_0 ~ p_0 and s_{t>0} from the
// unconditional marginal at step t, independently of the trajectory.
using StateSampler = std::function<Vec(int t, Rng& rng)>;

// Samples s_0 from env.Reset and s_t (t > 0) uniformly from the states seen
// at step t across `pool`.
StateSampler MarginalStateSampler(const envs::Environment& env,
                                  std::vector<envs::Trajectory> pool);

// Jensen upper bound on the cross-entropy H[rho_v, rho_v(nu)] from the first
// `n` unattacked trajectories (victim factor omitted). The standard error
// comes from the per-trajectory spread.
KlEstimate McCrossEntropyUpper(const EmissionDensity& attack,
                               std::span<const envs::Trajectory> unattacked,
                               const StateSampler& sampler, int n, Rng& rng);

// Fixed-capacity window of per-step consistency violations; the oldest value
// is evicted once the window is full.
class SlidingWindow {
 public:
  static constexpr std::size_t kDefaultCapacity = 50;

  explicit SlidingWindow(std::size_t capacity = kDefaultCapacity);
  void Push(double value);
  void Clear() { values_.clear(); }
  std::size_t size() const { return values_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<double>& values() const { return values_; }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

// Mean of the window; 0 for an empty window.
double SlidingKlSurrogate(const SlidingWindow& window);

}  // namespace mirage::estimators

#endif  // MIRAGE_ESTIMATORS_KL_HPP_
