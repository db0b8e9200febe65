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

#include "mirage/detectors/hypothesis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mirage::detectors {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double LogRatio(double p1, double p2) {
  if (p1 == 0.0 && p2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (p2 == 0.0) return kInf;
  if (p1 == 0.0) return -kInf;
  return std::log(p1) - std::log(p2);
}

// c * ln(x) with 0 * ln(anything) = 0 and c * ln(0) = -inf for c > 0.
double XLogY(double c, double x) {
  if (c == 0.0) return 0.0;
  if (x == 0.0) return -kInf;
  return c * std::log(x);
}

}  // namespace

std::string ToString(Hypothesis h) {
  switch (h) {
    case Hypothesis::kH0: return "H0";
    case Hypothesis::kH1: return "H1";
    case Hypothesis::kUndecided: return "undecided";
  }
  return "?";
}

LlrDecision LlrDecide(double p1, double p2, double threshold) {
  if (!(p1 >= 0.0) || !(p2 >= 0.0)) throw std::invalid_argument("LlrDecide: negative density");
  LlrDecision d;
  d.llr = LogRatio(p1, p2);
  if (std::isnan(d.llr)) {
    d.undefined_ratio = true;
    d.hypothesis = Hypothesis::kH0;
    return d;
  }
  d.hypothesis = d.llr >= threshold ? Hypothesis::kH0 : Hypothesis::kH1;
  return d;
}

LlrDecision LlrDecide(const estimators::CategoricalDist& p1,
                      const estimators::CategoricalDist& p2, int measurement,
                      double threshold) {
  if (p1.size() != p2.size() || measurement < 0 || measurement >= p1.size()) {
    throw std::invalid_argument("LlrDecide: measurement outside the sample space");
  }
  return LlrDecide(p1[measurement], p2[measurement], threshold);
}

WaldBoundaries WaldBoundaries::FromErrorRates(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("Wald error rates must lie in (0, 1)");
  }
  return {std::log(alpha / (1.0 - beta)), std::log((1.0 - alpha) / beta)};
}

WaldResult WaldSequential(const estimators::CategoricalDist& p1,
                          const estimators::CategoricalDist& p2,
                          std::span<const int> measurements, WaldBoundaries boundaries) {
  if (boundaries.lower > boundaries.upper) {
    throw std::invalid_argument("WaldSequential: lower boundary above upper");
  }
  WaldResult r;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const LlrDecision step = LlrDecide(p1, p2, measurements[i], 0.0);
    if (!step.undefined_ratio) r.llr_sum += step.llr;
    if (r.llr_sum >= boundaries.upper) {
      r.hypothesis = Hypothesis::kH0;
    } else if (r.llr_sum <= boundaries.lower) {
      r.hypothesis = Hypothesis::kH1;
    } else {
      continue;
    }
    r.stopping_step = static_cast<int>(i);
    return r;
  }
  return r;
}

double BinaryRelativeEntropy(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("BinaryRelativeEntropy: arguments must lie in [0, 1]");
  }
  const double a = 1.0 - alpha;
  const double pos = XLogY(alpha, alpha) + XLogY(a, a);
  const double neg = XLogY(alpha, 1.0 - beta) + XLogY(a, beta);
  if (neg == -kInf) return kInf;
  return pos - neg;
}

}  // namespace mirage::detectors
