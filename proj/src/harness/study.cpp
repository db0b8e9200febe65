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

#include "mirage/harness/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace mirage::harness {
namespace {

nlohmann::json Frames(const envs::Trajectory& traj, std::size_t start, int frames) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t t = start; t < start + static_cast<std::size_t>(frames); ++t) {
    const Vec& o = traj.steps[t].observation;
    out.push_back(std::vector<double>(o.data(), o.data() + o.size()));
  }
  return out;
}

std::string ClipId(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
    std::string id = std::string("clip-") + std::string(buf, 10);
    if (used.insert(id).second) return id;
  }
}

// One window of `frames` observations from a fresh episode long enough to hold it.
nlohmann::json SampleClip(const envs::Environment& env, const agents::Policy& victim,
                          attacks::Attack* attack, int frames, Rng& rng) {
  constexpr int kAttempts = 200;
  for (int i = 0; i < kAttempts; ++i) {
    Rng episode_rng(rng());
    const envs::Trajectory traj = agents::RunEpisode(env, victim, attack, episode_rng);
    if (traj.size() < static_cast<std::size_t>(frames)) continue;
    std::uniform_int_distribution<std::size_t> pick(0, traj.size() - frames);
    return Frames(traj, pick(rng), frames);
  }
  throw std::runtime_error("no episode of '" + env.spec().name + "' lasted " +
                           std::to_string(frames) + " steps");
}

double SampleStdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

nlohmann::json ToJson(const StudyConfig& c) {
  nlohmann::json envs = nlohmann::json::array();
  for (const auto& e : c.envs) {
    nlohmann::json attacks = nlohmann::json::object();
    for (const auto& [label, spec] : e.attacks) attacks[label] = ToJson(spec);
    envs.push_back({{"env", e.env},
                    {"victim", e.victim_checkpoint},
                    {"frames", e.frames},
                    {"clips_per_class", e.clips_per_class},
                    {"attacks", attacks}});
  }
  return {{"seed", c.seed}, {"envs", envs}};
}

StudyConfig StudyConfigFromJson(const nlohmann::json& j) {
  StudyConfig c;
  c.seed = j.value("seed", c.seed);
  for (const auto& e : j.at("envs")) {
    StudyEnvConfig env;
    env.env = e.at("env").get<std::string>();
    env.victim_checkpoint = e.at("victim").get<std::string>();
    env.frames = e.value("frames", env.env == "pendulum" ? 100 : 10);
    env.clips_per_class = e.value("clips_per_class", env.clips_per_class);
    if (env.frames < 1 || env.clips_per_class < 1) {
      throw std::invalid_argument("study frames and clips_per_class must be >= 1");
    }
    for (const auto& [label, spec] : e.at("attacks").items()) {
      if (label == kUnattackedClass) {
        throw std::invalid_argument("'unattacked' is implicit and cannot be configured");
      }
      env.attacks[label] = AttackSpecFromJson(spec);
    }
    c.envs.push_back(std::move(env));
  }
  return c;
}

StudyBundle ExportStudyBundle(const StudyConfig& config) {
  Rng rng(config.seed);
  std::set<std::string> used;
  nlohmann::json intro = nlohmann::json::array();
  nlohmann::json clips = nlohmann::json::array();
  nlohmann::json labels = nlohmann::json::object();
  nlohmann::json clip_envs = nlohmann::json::object();

  for (const auto& e : config.envs) {
    const auto env = envs::MakeEnvironment(e.env);
    VictimCheckpoint victim = VictimCheckpointFromJson(ReadJsonFile(e.victim_checkpoint));
    if (victim.env != e.env) {
      throw std::invalid_argument("victim checkpoint is for '" + victim.env + "', not '" + e.env + "'");
    }
    std::vector<std::pair<std::string, std::unique_ptr<attacks::Attack>>> classes;
    classes.emplace_back(kUnattackedClass, nullptr);
    std::vector<std::string> missing;
    for (const auto& [label, spec] : e.attacks) {
      try {
        classes.emplace_back(label, MakeAttack(*env, victim.policy, spec));
      } catch (const std::exception& ex) {
        missing.push_back(label + " (" + ex.what() + ")");
      }
    }
    if (!missing.empty()) {
      std::string msg = "unavailable attack classes for " + e.env + ":";
      for (const auto& m : missing) msg += " " + m;
      throw std::invalid_argument(msg);
    }

    intro.push_back({{"env", e.env}, {"frames", SampleClip(*env, victim.policy, nullptr, e.frames, rng)}});
    nlohmann::json group = nlohmann::json::array();
    for (auto& [label, attack] : classes) {
      for (int k = 0; k < e.clips_per_class; ++k) {
        const std::string id = ClipId(rng, used);
        group.push_back({{"clip_id", id},
                         {"env", e.env},
                         {"frames", SampleClip(*env, victim.policy, attack.get(), e.frames, rng)}});
        labels[id] = label;
        clip_envs[id] = e.env;
      }
    }
    std::shuffle(group.begin(), group.end(), rng);
    for (auto& clip : group) clips.push_back(std::move(clip));
  }
  StudyBundle bundle;
  bundle.clips = {{"format", "mirage-study-bundle/1"},
                  {"presentation_seed", config.seed},
                  {"intro", intro},
                  {"clips", clips}};
  bundle.labels = {{"format", "mirage-study-labels/1"}, {"labels", labels}, {"envs", clip_envs}};
  return bundle;
}

ZTest TwoProportionZTest(long x1, long n1, long x2, long n2, double alpha) {
  if (n1 <= 0 || n2 <= 0 || x1 < 0 || x2 < 0 || x1 > n1 || x2 > n2) {
    throw std::invalid_argument("TwoProportionZTest: counts out of range");
  }
  ZTest t;
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  if (se == 0.0) return t;  // both proportions 0 or both 1
  t.z = (p1 - p2) / se;
  t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
  t.reject = t.p_value < alpha;
  return t;
}

StudyReport StudyStatistics(const nlohmann::json& responses, const nlohmann::json& labels,
                            double alpha) {
  const nlohmann::json& label_map = labels.at("labels");
  const nlohmann::json env_map = labels.value("envs", nlohmann::json::object());
  // group -> class -> participant -> (false, total)
  std::map<std::string, std::map<std::string, std::map<std::string, std::pair<long, long>>>> counts;
  std::set<std::string> all_classes;
  for (const auto& [id, label] : label_map.items()) all_classes.insert(label.get<std::string>());

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : responses.at("responses")) {
    const std::string id = r.at("clip_id").get<std::string>();
    if (!label_map.contains(id)) throw std::invalid_argument("response for unknown clip '" + id + "'");
    const std::string judgment = r.at("judgment").get<std::string>();
    if (judgment != "suspicious" && judgment != "unsuspicious") {
      throw std::invalid_argument("judgment must be suspicious or unsuspicious, got '" + judgment + "'");
    }
    const std::string label = label_map.at(id).get<std::string>();
    const std::string participant = r.value("participant", "anonymous");
    if (!seen.emplace(participant, id).second) {
      throw std::invalid_argument("participant '" + participant + "' judged clip '" + id +
                                  "' twice");
    }
    std::vector<std::string> groups{"all"};
    if (env_map.contains(id)) groups.push_back(env_map.at(id).get<std::string>());
    for (const auto& g : groups) {
      auto& c = counts[g][label][participant];
      c.first += judgment == "suspicious" ? 1 : 0;
      c.second += 1;
    }
  }

  StudyReport report;
  for (const auto& [group, by_class] : counts) {
    auto& stats = report.classes[group];
    for (const auto& label : all_classes) {
      auto it = by_class.find(label);
      if (it == by_class.end()) {
        if (group == "all") report.warnings.push_back("class '" + label + "' has no responses; excluded");
        continue;
      }
      ClassStatistics s;
      s.label = label;
      std::vector<double> per_participant;
      for (const auto& [participant, c] : it->second) {
        s.marked_false += c.first;
        s.responses += c.second;
        per_participant.push_back(static_cast<double>(c.first) / static_cast<double>(c.second));
      }
      s.p_false = static_cast<double>(s.marked_false) / static_cast<double>(s.responses);
      s.stddev = SampleStdDev(per_participant);
      stats.push_back(s);
    }
    auto base = std::find_if(stats.begin(), stats.end(),
                             [](const ClassStatistics& s) { return s.label == kUnattackedClass; });
    if (base == stats.end()) {
      if (group == "all") report.warnings.push_back("no unattacked responses; z-tests skipped");
      continue;
    }
    for (const auto& s : stats) {
      if (s.label == kUnattackedClass) continue;
      ZTest t = TwoProportionZTest(s.marked_false, s.responses, base->marked_false,
                                   base->responses, alpha);
      t.label = s.label;
      report.tests[group].push_back(t);
    }
  }
  return report;
}

nlohmann::json ToJson(const StudyReport& r) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [group, stats] : r.classes) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& s : stats) {
      classes.push_back({{"class", s.label},
                         {"responses", s.responses},
                         {"marked_false", s.marked_false},
                         {"p_false", s.p_false},
                         {"stddev", s.stddev}});
    }
    nlohmann::json tests = nlohmann::json::array();
    if (auto it = r.tests.find(group); it != r.tests.end()) {
      for (const auto& t : it->second) {
        tests.push_back({{"class", t.label},
                         {"against", kUnattackedClass},
                         {"z", t.z},
                         {"p_value", t.p_value},
                         {"verdict", t.reject ? "reject" : "cannot reject"}});
      }
    }
    groups[group] = {{"classes", classes}, {"z_tests", tests}};
  }
  return {{"format", "mirage-study-report/1"}, {"groups", groups}, {"warnings", r.warnings}};
}

}  // namespace mirage::harness
