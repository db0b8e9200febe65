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

#include "mirage/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "mirage/harness/scoring.hpp"

namespace mirage::harness {

void ExperimentConfig::Validate() const {
  if (name.empty()) throw std::invalid_argument("experiment needs a name");
  if (episodes_per_seed < 1) throw std::invalid_argument("episodes_per_seed must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("experiment seeds must be distinct");
  }
  if (victim_checkpoint.empty()) throw std::invalid_argument("experiment needs a victim");
}

nlohmann::json ToJson(const ExperimentConfig& c) {
  nlohmann::json j{{"name", c.name},
                   {"env", c.env},
                   {"attack", ToJson(c.attack)},
                   {"victim", c.victim_checkpoint},
                   {"episodes_per_seed", c.episodes_per_seed},
                   {"seeds", c.seeds},
                   {"deterministic_victim", c.deterministic_victim},
                   {"output_dir", c.output_dir},
                   {"save_trajectories", c.save_trajectories}};
  j["detector"] = c.detector_checkpoint.empty() ? nlohmann::json(nullptr)
                                                : nlohmann::json(c.detector_checkpoint);
  if (c.worst_mean) j["worst_mean"] = *c.worst_mean;
  return j;
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = j.at("name").get<std::string>();
  c.env = j.at("env").get<std::string>();
  c.attack = AttackSpecFromJson(j.at("attack"));
  c.victim_checkpoint = j.at("victim").get<std::string>();
  if (j.contains("detector") && !j.at("detector").is_null()) {
    c.detector_checkpoint = j.at("detector").get<std::string>();
  }
  c.episodes_per_seed = j.value("episodes_per_seed", c.episodes_per_seed);
  c.seeds = j.value("seeds", c.seeds);
  c.deterministic_victim = j.value("deterministic_victim", c.deterministic_victim);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.save_trajectories = j.value("save_trajectories", c.save_trajectories);
  if (j.contains("worst_mean") && !j.at("worst_mean").is_null()) {
    c.worst_mean = j.at("worst_mean").get<double>();
  }
  c.Validate();
  return c;
}

std::vector<double> RunResult::AllReturns() const {
  std::vector<double> out;
  for (const auto& s : seeds) out.insert(out.end(), s.returns.begin(), s.returns.end());
  return out;
}

std::vector<bool> RunResult::AllDetected() const {
  std::vector<bool> out;
  for (const auto& s : seeds) out.insert(out.end(), s.detected.begin(), s.detected.end());
  return out;
}

void RunResult::Rescore(double worst) {
  worst_mean = std::min(worst, unattacked_mean);
  adversary_score = AdversaryScore(unattacked_mean, mean, worst_mean);
  detection_adjusted_score =
      DetectionAdjustedScore(AllReturns(), AllDetected(), unattacked_mean, worst_mean);
}

nlohmann::json ToJson(const RunResult& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"mean", s.mean},
                     {"detection_rate", s.detection_rate},
                     {"unattacked_mean", s.unattacked_mean},
                     {"returns", s.returns},
                     {"detected", s.detected},
                     {"alarm_steps", s.alarm_steps}});
  }
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& [seed, why] : r.missing_seeds) missing.push_back({{"seed", seed}, {"error", why}});
  return {{"format", "mirage-result/1"},
          {"name", r.name},
          {"env", r.env},
          {"attack", r.attack},
          {"budget", r.budget ? nlohmann::json(*r.budget) : nlohmann::json(nullptr)},
          {"has_detector", r.has_detector},
          {"mean_return", r.mean},
          {"stddev_return", r.stddev},
          {"detection_rate", r.detection_rate},
          {"detection_rate_stddev", r.detection_rate_stddev},
          {"unattacked_mean", r.unattacked_mean},
          {"worst_mean", r.worst_mean},
          {"adversary_score", r.adversary_score},
          {"detection_adjusted_score", r.detection_adjusted_score},
          {"budget_violations", r.budget_violations},
          {"max_deviation", r.max_deviation},
          {"missing_seeds", missing},
          {"seeds", seeds}};
}

RunResult RunResultFromJson(const nlohmann::json& j) {
  if (j.value("format", "") != "mirage-result/1") {
    throw std::invalid_argument("not a run result");
  }
  RunResult r;
  r.name = j.at("name").get<std::string>();
  r.env = j.at("env").get<std::string>();
  r.attack = j.at("attack").get<std::string>();
  if (!j.at("budget").is_null()) r.budget = j.at("budget").get<double>();
  r.has_detector = j.at("has_detector").get<bool>();
  r.mean = j.at("mean_return").get<double>();
  r.stddev = j.at("stddev_return").get<double>();
  r.detection_rate = j.at("detection_rate").get<double>();
  r.detection_rate_stddev = j.at("detection_rate_stddev").get<double>();
  r.unattacked_mean = j.at("unattacked_mean").get<double>();
  r.worst_mean = j.at("worst_mean").get<double>();
  r.adversary_score = j.at("adversary_score").get<double>();
  r.detection_adjusted_score = j.at("detection_adjusted_score").get<double>();
  r.budget_violations = j.at("budget_violations").get<long>();
  r.max_deviation = j.at("max_deviation").get<double>();
  for (const auto& m : j.at("missing_seeds")) {
    r.missing_seeds.emplace_back(m.at("seed").get<std::uint64_t>(), m.at("error").get<std::string>());
  }
  for (const auto& s : j.at("seeds")) {
    SeedResult seed;
    seed.seed = s.at("seed").get<std::uint64_t>();
    seed.mean = s.at("mean").get<double>();
    seed.detection_rate = s.at("detection_rate").get<double>();
    seed.unattacked_mean = s.at("unattacked_mean").get<double>();
    seed.returns = s.at("returns").get<std::vector<double>>();
    seed.detected = s.at("detected").get<std::vector<bool>>();
    seed.alarm_steps = s.at("alarm_steps").get<std::vector<int>>();
    r.seeds.push_back(std::move(seed));
  }
  return r;
}

RunResult RunExperiment(const ExperimentConfig& config, bool write_outputs) {
  config.Validate();
  const auto env = envs::MakeEnvironment(config.env);
  VictimCheckpoint victim = VictimCheckpointFromJson(ReadJsonFile(config.victim_checkpoint));
  if (victim.env != config.env) {
    throw std::invalid_argument("victim checkpoint is for '" + victim.env + "', not '" +
                                config.env + "'");
  }
  victim.policy.set_deterministic(config.deterministic_victim);
  std::optional<detectors::Detector> detector;
  if (!config.detector_checkpoint.empty()) {
    const nlohmann::json dj = ReadJsonFile(config.detector_checkpoint);
    if (dj.value("env", config.env) != config.env) {
      throw std::invalid_argument("detector checkpoint is for '" +
                                  dj.value("env", std::string("?")) + "'");
    }
    detector = detectors::Detector::FromJson(dj);
  }

  RunResult result;
  result.name = config.name;
  result.env = config.env;
  result.attack = attacks::ToString(config.attack.kind);
  result.budget = config.attack.budget;
  result.has_detector = detector.has_value();

  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  const std::filesystem::path out_dir(config.output_dir);
  for (std::uint64_t seed : seeds) {
    try {
      auto attack = MakeAttack(*env, victim.policy, config.attack);
      const agents::EvaluationResult attacked = agents::EvaluateReturn(
          *env, victim.policy, attack.get(), config.episodes_per_seed, seed, true);
      const agents::EvaluationResult clean = agents::EvaluateReturn(
          *env, victim.policy, nullptr, config.episodes_per_seed, seed, false);
      SeedResult s;
      s.seed = seed;
      s.returns = attacked.returns;
      s.mean = attacked.mean;
      s.unattacked_mean = clean.mean;
      int hits = 0;
      for (const auto& traj : attacked.trajectories) {
        const detectors::DetectorVerdict v =
            detector ? detector->Judge(*env, traj) : detectors::DetectorVerdict{};
        s.detected.push_back(v.attacked);
        s.alarm_steps.push_back(v.alarm_step.value_or(-1));
        hits += v.attacked ? 1 : 0;
        for (const auto& rec : traj.steps) {
          const double dev = (env->Normalize(rec.observation) - env->Normalize(rec.state)).norm();
          result.max_deviation = std::max(result.max_deviation, dev);
          if (config.attack.budget && dev > *config.attack.budget + attacks::kBudgetTolerance) {
            ++result.budget_violations;
          }
        }
      }
      s.detection_rate = static_cast<double>(hits) / static_cast<double>(s.returns.size());
      if (write_outputs && config.save_trajectories) {
        const auto path = out_dir / (config.name + ".seed" + std::to_string(seed) + ".jsonl");
        std::filesystem::create_directories(out_dir);
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        envs::WriteTrajectoryLog(out, {env->spec(), seed, config.name}, attacked.trajectories);
      }
      result.seeds.push_back(std::move(s));
    } catch (const std::exception& e) {
      // Configuration errors are not per-seed failures.
      if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr ||
          dynamic_cast<const UnsupportedError*>(&e) != nullptr) {
        throw;
      }
      result.missing_seeds.emplace_back(seed, e.what());
    }
  }
  if (result.seeds.empty()) throw std::runtime_error("every seed failed for '" + config.name + "'");

  const std::vector<double> all = result.AllReturns();
  result.mean = agents::Mean(all);
  std::vector<double> seed_means;
  std::vector<double> seed_rates;
  std::vector<double> clean_means;
  long detected = 0;
  for (const auto& s : result.seeds) {
    seed_means.push_back(s.mean);
    seed_rates.push_back(s.detection_rate);
    clean_means.push_back(s.unattacked_mean);
    detected += std::count(s.detected.begin(), s.detected.end(), true);
  }
  result.stddev = agents::StdDev(seed_means);
  result.detection_rate = static_cast<double>(detected) / static_cast<double>(all.size());
  result.detection_rate_stddev = agents::StdDev(seed_rates);
  result.unattacked_mean = agents::Mean(clean_means);
  result.Rescore(config.worst_mean.value_or(std::min(result.mean, result.unattacked_mean)));

  if (write_outputs) WriteJsonFile(out_dir / (config.name + ".result.json"), ToJson(result));
  return result;
}

nlohmann::json BuildReport(std::vector<RunResult>& results) {
  // Budgeted runs are anchored within their (env, budget) class; unbudgeted
  // runs against the lowest mean seen anywhere in their environment.
  std::map<std::string, double> env_worst;
  std::map<std::pair<std::string, double>, double> class_worst;
  for (const auto& r : results) {
    auto [it, fresh] = env_worst.emplace(r.env, r.mean);
    if (!fresh) it->second = std::min(it->second, r.mean);
    if (r.budget) {
      auto [c, cfresh] = class_worst.emplace(std::make_pair(r.env, *r.budget), r.mean);
      if (!cfresh) c->second = std::min(c->second, r.mean);
    }
  }
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(results[a].env, results[a].name) < std::tie(results[b].env, results[b].name);
  });

  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i : order) {
    RunResult& r = results[i];
    const double worst = r.budget ? class_worst.at({r.env, *r.budget}) : env_worst.at(r.env);
    r.Rescore(worst);
    runs.push_back({{"name", r.name},
                    {"env", r.env},
                    {"attack", r.attack},
                    {"budget", r.budget ? nlohmann::json(*r.budget) : nlohmann::json(nullptr)},
                    {"mean_return", r.mean},
                    {"stddev_return", r.stddev},
                    {"detection_rate", r.detection_rate},
                    {"unattacked_mean", r.unattacked_mean},
                    {"worst_mean", r.worst_mean},
                    {"adversary_score", r.adversary_score},
                    {"detection_adjusted_score", r.detection_adjusted_score},
                    {"missing_seeds", r.missing_seeds.size()}});
  }
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& [key, worst] : class_worst) {
    classes.push_back({{"env", key.first}, {"budget", key.second}, {"worst_mean", worst}});
  }
  return {{"format", "mirage-report/1"}, {"classes", classes}, {"runs", runs}};
}

}  // namespace mirage::harness
