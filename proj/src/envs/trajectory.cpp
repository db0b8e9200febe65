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

#include "mirage/envs/trajectory.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace mirage::envs {

namespace {

std::vector<double> ToStd(const Vec& v) { return {v.begin(), v.end()}; }

Vec FromStd(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double Trajectory::Return() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

nlohmann::json ToJson(const TransitionRecord& record) {
  nlohmann::json j;
  j["t"] = record.t;
  j["state"] = ToStd(record.state);
  j["observation"] = ToStd(record.observation);
  if (record.action.value.size() > 0) {
    j["action"] = ToStd(record.action.value);
  } else {
    j["action"] = record.action.index;
  }
  j["reward"] = record.reward;
  j["done"] = record.done;
  return j;
}

TransitionRecord TransitionFromJson(const nlohmann::json& j) {
  TransitionRecord r;
  r.t = j.at("t").get<int>();
  r.state = FromStd(j.at("state").get<std::vector<double>>());
  r.observation = FromStd(j.at("observation").get<std::vector<double>>());
  const auto& a = j.at("action");
  if (a.is_array()) {
    r.action = Action::Continuous(FromStd(a.get<std::vector<double>>()));
  } else {
    r.action = Action::Discrete(a.get<int>());
  }
  r.reward = j.at("reward").get<double>();
  r.done = j.at("done").get<bool>();
  return r;
}

void WriteTrajectoryLog(std::ostream& out, const TrajectoryLogHeader& header,
                        const std::vector<Trajectory>& episodes) {
  nlohmann::json h;
  h["type"] = "header";
  h["env"] = ToJson(header.spec);
  h["seed"] = header.seed;
  h["label"] = header.label;
  h["episodes"] = episodes.size();
  out << h.dump() << '\n';
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (const auto& record : episodes[e].steps) {
      nlohmann::json j = ToJson(record);
      j["episode"] = e;
      out << j.dump() << '\n';
    }
  }
}

std::vector<Trajectory> ReadTrajectoryLog(std::istream& in,
                                          nlohmann::json* header) {
  std::vector<Trajectory> episodes;
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (!seen_header) {
      if (j.value("type", "") != "header") {
        throw std::runtime_error("trajectory log: missing header line");
      }
      if (header != nullptr) *header = j;
      seen_header = true;
      continue;
    }
    const auto e = j.at("episode").get<std::size_t>();
    if (e >= episodes.size()) episodes.resize(e + 1);
    episodes[e].steps.push_back(TransitionFromJson(j));
  }
  if (!seen_header) throw std::runtime_error("trajectory log: empty");
  return episodes;
}

}  // namespace mirage::envs
