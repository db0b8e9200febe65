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

#ifndef MIRAGE_DETECTORS_HYPOTHESIS_HPP_
#define MIRAGE_DETECTORS_HYPOTHESIS_HPP_

#include <span>
#include <string>

#include "mirage/estimators/kl.hpp"

namespace mirage::detectors {

// H0: measurements come from P1 (unattacked). H1: they come from P2.
enum class Hypothesis { kH0, kH1, kUndecided };
std::string ToString(Hypothesis h);

struct LlrDecision {
  Hypothesis hypothesis = Hypothesis::kH0;
  double llr = 0.0;
  // Both densities vanish at the measurement, so the ratio is undefined and
  // H0 is returned by convention.
  bool undefined_ratio = false;
};

// H0 iff log(p1 / p2) >= threshold. Densities may be zero.
LlrDecision LlrDecide(double p1, double p2, double threshold);
LlrDecision LlrDecide(const estimators::CategoricalDist& p1,
                      const estimators::CategoricalDist& p2, int measurement,
                      double threshold);

// Accept H0 once the running LLR reaches `upper`, H1 once it falls to `lower`.
struct WaldBoundaries {
  double lower = 0.0;
  double upper = 0.0;

  // Classic boundaries for type I error alpha (H1 accepted under H0) and
  // type II error beta: upper = ln((1 - alpha) / beta), lower = ln(alpha / (1 - beta)).
  static WaldBoundaries FromErrorRates(double alpha, double beta);
};

struct WaldResult {
  Hypothesis hypothesis = Hypothesis::kUndecided;
  int stopping_step = -1;  // index of the deciding measurement; -1 if undecided
  double llr_sum = 0.0;
};

WaldResult WaldSequential(const estimators::CategoricalDist& p1,
                          const estimators::CategoricalDist& p2,
                          std::span<const int> measurements, WaldBoundaries boundaries);

// d(a, b) = a ln(a / (1 - b)) + (1 - a) ln((1 - a) / b), with 0 ln 0 = 0.
// +infinity when a log argument vanishes under a nonzero coefficient.
double BinaryRelativeEntropy(double alpha, double beta);

}  // namespace mirage::detectors

#endif  // MIRAGE_DETECTORS_HYPOTHESIS_HPP_
