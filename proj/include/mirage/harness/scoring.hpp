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

#ifndef MIRAGE_HARNESS_SCORING_HPP_
#define MIRAGE_HARNESS_SCORING_HPP_

#include <vector>

namespace mirage::harness {

// clip01((unattacked - attacked) / (unattacked - worst)); 0 when no attack
// in the class reduced the return (worst == unattacked).
double AdversaryScore(double unattacked_mean, double attacked_mean, double worst_mean);

// As AdversaryScore, but each episode flagged as attacked contributes no
// reduction.
double DetectionAdjustedScore(const std::vector<double>& returns,
                              const std::vector<bool>& detected, double unattacked_mean,
                              double worst_mean);

}  // namespace mirage::harness

#endif  // MIRAGE_HARNESS_SCORING_HPP_
