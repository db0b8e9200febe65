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

#include "mirage/harness/scoring.hpp"

#include <algorithm>
#include <stdexcept>

namespace mirage::harness {
namespace {

double Clip01(double x) { return std::clamp(x, 0.0, 1.0); }

void CheckAnchors(double unattacked_mean, double worst_mean) {
  if (worst_mean > unattacked_mean) {
    throw std::invalid_argument("worst mean return exceeds the unattacked mean");
  }
}

}  // namespace

double AdversaryScore(double unattacked_mean, double attacked_mean, double worst_mean) {
  CheckAnchors(unattacked_mean, worst_mean);
  if (worst_mean == unattacked_mean) return 0.0;
  return Clip01((unattacked_mean - attacked_mean) / (unattacked_mean - worst_mean));
}

double DetectionAdjustedScore(const std::vector<double>& returns,
                              const std::vector<bool>& detected, double unattacked_mean,
                              double worst_mean) {
  CheckAnchors(unattacked_mean, worst_mean);
  if (returns.size() != detected.size()) {
    throw std::invalid_argument("returns and verdicts differ in length");
  }
  if (returns.empty() || worst_mean == unattacked_mean) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    if (!detected[i]) total += unattacked_mean - returns[i];
  }
  const double mean_reduction = total / static_cast<double>(returns.size());
  return Clip01(mean_reduction / (unattacked_mean - worst_mean));
}

}  // namespace mirage::harness
