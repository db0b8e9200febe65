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

#ifndef MIRAGE_HARNESS_STUDY_HPP_
#define MIRAGE_HARNESS_STUDY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mirage/harness/checkpoint.hpp"

namespace mirage::harness {

// Clip classes shown to participants.
inline constexpr const char* kUnattackedClass = "unattacked";

struct StudyEnvConfig {
  std::string env;
  std::string victim_checkpoint;
  int frames = 10;
  int clips_per_class = 6;
  // Attack class name (mnp, samdp, epsilon-illusory) -> how to build it.
  std::map<std::string, AttackSpec> attacks;
};

struct StudyConfig {
  std::vector<StudyEnvConfig> envs;
  std::uint64_t seed = 0;
};

nlohmann::json ToJson(const StudyConfig& c);
StudyConfig StudyConfigFromJson(const nlohmann::json& j);

struct StudyBundle {
  nlohmann::json clips;   // payload shown to participants, label-free
  nlohmann::json labels;  // clip id -> class, kept by the operator
};

// Samples clips_per_class clips of `frames` consecutive observations (raw
// units) per class and environment, plus one unattacked intro clip per
// environment, and shuffles the presentation order with the bundle seed.
// Throws listing every class whose attack cannot be built.
StudyBundle ExportStudyBundle(const StudyConfig& config);

struct ClassStatistics {
  std::string label;
  long responses = 0;
  long marked_false = 0;
  double p_false = 0.0;
  // Spread of the per-participant proportions (0 with one participant).
  double stddev = 0.0;
};

struct ZTest {
  std::string label;  // attack class compared against unattacked
  double z = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

struct StudyReport {
  // Keyed by environment name, plus "all" for the pooled table.
  std::map<std::string, std::vector<ClassStatistics>> classes;
  std::map<std::string, std::vector<ZTest>> tests;
  std::vector<std::string> warnings;
};

// Two-sided two-proportion z-test with pooled variance.
ZTest TwoProportionZTest(long x1, long n1, long x2, long n2, double alpha = 0.05);

// Responses marked "suspicious" count as "false". Every response must
// reference a labelled clip, once per participant.
StudyReport StudyStatistics(const nlohmann::json& responses, const nlohmann::json& labels,
                            double alpha = 0.05);
nlohmann::json ToJson(const StudyReport& r);

}  // namespace mirage::harness

#endif  // MIRAGE_HARNESS_STUDY_HPP_
