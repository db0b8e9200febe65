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

// Command-line front end: training, evaluation, reporting and study tooling.
// Every subcommand reads and writes JSON.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirage/agents/victim.hpp"
#include "mirage/envs/environment.hpp"
#include "mirage/harness/checkpoint.hpp"
#include "mirage/harness/experiment.hpp"
#include "mirage/harness/pipeline.hpp"
#include "mirage/harness/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mirage;

namespace {

// Exit codes.
constexpr int kUsageError = 2;
constexpr int kTrainingFailed = 3;
constexpr int kUnsupported = 4;

json OptionalConfig(const std::string& path) {
  return path.empty() ? json::object() : harness::ReadJsonFile(path);
}

harness::VictimCheckpoint LoadVictim(const std::string& path, const std::string& env) {
  harness::VictimCheckpoint v = harness::VictimCheckpointFromJson(harness::ReadJsonFile(path));
  if (!env.empty() && v.env != env) {
    throw std::invalid_argument("victim '" + path + "' was trained on " + v.env + ", not " + env);
  }
  return v;
}

struct VictimArgs {
  std::string env;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
};

void TrainVictimCommand(const VictimArgs& a) {
  const auto env = envs::MakeEnvironment(a.env);
  json merged = agents::ToJson(agents::DefaultVictimConfig(a.env));
  merged.update(OptionalConfig(a.config));
  agents::TrainConfig config = agents::TrainConfigFromJson(merged);
  if (a.seed) config.seed = *a.seed;
  if (a.steps) config.total_steps = *a.steps;
  harness::VictimCheckpoint checkpoint;
  checkpoint.env = a.env;
  checkpoint.config = config;
  checkpoint.policy = agents::TrainVictim(*env, config, &checkpoint.report);
  harness::WriteJsonFile(a.out, harness::ToJson(checkpoint));
  std::printf("victim %s: mean return %.3f (sd %.3f) after %ld steps -> %s\n", a.env.c_str(),
              checkpoint.report.evaluation_mean, checkpoint.report.evaluation_stddev,
              checkpoint.report.steps, a.out.c_str());
}

struct AdversaryArgs {
  std::string env;
  std::string victim;
  std::string attack;
  std::optional<double> budget;
  std::optional<double> epsilon;
  std::string budget_reference;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
};

void TrainAdversaryCommand(const AdversaryArgs& a) {
  const auto env = envs::MakeEnvironment(a.env);
  const harness::VictimCheckpoint victim = LoadVictim(a.victim, a.env);
  const attacks::AttackKind kind = attacks::AttackKindFromString(a.attack);
  harness::AdversaryTrainingConfig config = harness::AdversaryTrainingConfigFromJson(
      OptionalConfig(a.config), harness::DefaultAdversaryConfig(a.env, kind));
  config.kind = kind;
  if (a.budget) config.budget = *a.budget;
  if (a.epsilon) config.epsilon = *a.epsilon;
  if (!a.budget_reference.empty()) {
    config.architecture.budget_reference = attacks::BudgetReferenceFromString(a.budget_reference);
  }
  if (a.seed) config.train.seed = *a.seed;
  if (a.steps) config.train.total_steps = *a.steps;
  json checkpoint = harness::TrainAdversary(*env, victim.policy, config);
  checkpoint["training"] = harness::ToJson(config);
  harness::WriteJsonFile(a.out, checkpoint);
  std::printf("%s adversary on %s: final lambda %.4g, measured kl %.4g -> %s\n",
              a.attack.c_str(), a.env.c_str(), checkpoint.value("final_lambda", 0.0),
              checkpoint.value("measured_kl", 0.0), a.out.c_str());
}

struct DetectorArgs {
  std::string env;
  std::string victim;
  std::string config;
  std::string out;
  std::optional<double> fpr;
  std::optional<std::uint64_t> seed;
};

void TrainDetectorCommand(const DetectorArgs& a) {
  const auto env = envs::MakeEnvironment(a.env);
  const harness::VictimCheckpoint victim = LoadVictim(a.victim, a.env);
  harness::DetectorTrainingConfig config =
      harness::DetectorTrainingConfigFromJson(OptionalConfig(a.config));
  if (a.fpr) config.target_fpr = *a.fpr;
  if (a.seed) config.seed = *a.seed;
  const detectors::Detector detector = harness::TrainDetector(*env, victim.policy, config);
  harness::WriteJsonFile(a.out, harness::DetectorCheckpointJson(a.env, detector));
  const auto& p = detector.params();
  std::printf("detector %s: reference %.4g, drift %.4g, threshold %.4g -> %s\n", a.env.c_str(),
              p.reference_mean, p.drift, p.threshold, a.out.c_str());
}

struct EvaluateArgs {
  std::string config;
  std::optional<int> episodes;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  bool deterministic_victim = false;
  bool no_trajectories = false;
};

void EvaluateCommand(const EvaluateArgs& a) {
  harness::ExperimentConfig config =
      harness::ExperimentConfigFromJson(harness::ReadJsonFile(a.config));
  if (a.episodes) config.episodes_per_seed = *a.episodes;
  if (!a.seeds.empty()) config.seeds = a.seeds;
  if (!a.output_dir.empty()) config.output_dir = a.output_dir;
  if (a.deterministic_victim) config.deterministic_victim = true;
  if (a.no_trajectories) config.save_trajectories = false;
  const harness::RunResult r = harness::RunExperiment(config);
  std::printf("%s: mean return %.3f (sd over seeds %.3f)", r.name.c_str(), r.mean, r.stddev);
  if (r.has_detector) std::printf(", detection rate %.3f", r.detection_rate);
  std::printf(", budget violations %ld\n", r.budget_violations);
  for (const auto& [seed, why] : r.missing_seeds) {
    std::fprintf(stderr, "seed %llu missing: %s\n", static_cast<unsigned long long>(seed),
                 why.c_str());
  }
}

void ReportCommand(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<harness::RunResult> results;
  for (const auto& input : inputs) {
    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::directory_iterator(input)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 12 && name.ends_with(".result.json")) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.emplace_back(input);
    }
    for (const auto& f : files) results.push_back(harness::RunResultFromJson(harness::ReadJsonFile(f)));
  }
  if (results.empty()) throw std::invalid_argument("no result files found");
  const json report = harness::BuildReport(results);
  if (!out.empty()) harness::WriteJsonFile(out, report);
  std::printf("%-28s %-10s %-18s %7s %12s %9s %8s %8s\n", "run", "env", "attack", "budget",
              "return", "detect", "score", "adjusted");
  for (const auto& r : results) {
    std::printf("%-28s %-10s %-18s %7s %12.3f %9.3f %8.3f %8.3f\n", r.name.c_str(), r.env.c_str(),
                r.attack.c_str(), r.budget ? std::to_string(*r.budget).substr(0, 5).c_str() : "-",
                r.mean, r.detection_rate, r.adversary_score, r.detection_adjusted_score);
  }
}

void ExportStudyCommand(const std::string& config_path, const std::string& out_dir,
                        std::optional<std::uint64_t> seed) {
  harness::StudyConfig config = harness::StudyConfigFromJson(harness::ReadJsonFile(config_path));
  if (seed) config.seed = *seed;
  const harness::StudyBundle bundle = harness::ExportStudyBundle(config);
  harness::WriteJsonFile(fs::path(out_dir) / "bundle.json", bundle.clips);
  harness::WriteJsonFile(fs::path(out_dir) / "labels.json", bundle.labels);
  std::printf("%zu clips -> %s/bundle.json (labels in labels.json)\n",
              bundle.clips.at("clips").size(), out_dir.c_str());
}

void StudyStatsCommand(const std::string& responses, const std::string& labels,
                       const std::string& out, double alpha) {
  const harness::StudyReport report = harness::StudyStatistics(
      harness::ReadJsonFile(responses), harness::ReadJsonFile(labels), alpha);
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const json j = harness::ToJson(report);
  if (!out.empty()) harness::WriteJsonFile(out, j);
  for (const auto& [group, stats] : report.classes) {
    std::printf("[%s]\n", group.c_str());
    for (const auto& s : stats) {
      std::printf("  %-18s P(false) %.3f  sd %.3f  n %ld\n", s.label.c_str(), s.p_false, s.stddev,
                  s.responses);
    }
    if (auto it = report.tests.find(group); it != report.tests.end()) {
      for (const auto& t : it->second) {
        std::printf("  z-test %-18s z %+.3f  p %.4f  %s\n", t.label.c_str(), t.z, t.p_value,
                    t.reject ? "reject" : "cannot reject");
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observation-attack training, detection and evaluation"};
  app.require_subcommand(1);
  const std::vector<std::string> env_names = envs::EnvironmentNames();

  VictimArgs victim_args;
  auto* victim_cmd = app.add_subcommand("train-victim", "Train a victim policy");
  victim_cmd->add_option("--env", victim_args.env)->required()->check(CLI::IsMember(env_names));
  victim_cmd->add_option("--config", victim_args.config, "JSON training config overrides");
  victim_cmd->add_option("--out", victim_args.out)->required();
  victim_cmd->add_option("--seed", victim_args.seed);
  victim_cmd->add_option("--steps", victim_args.steps, "Environment step budget");

  AdversaryArgs adv_args;
  auto* adv_cmd = app.add_subcommand("train-adversary", "Train an SA-MDP or epsilon-illusory attack");
  adv_cmd->add_option("--env", adv_args.env)->required()->check(CLI::IsMember(env_names));
  adv_cmd->add_option("--victim", adv_args.victim)->required();
  adv_cmd->add_option("--attack", adv_args.attack)
      ->required()
      ->check(CLI::IsMember({"mnp", "samdp", "epsilon-illusory", "perfect-illusory", "identity"}));
  adv_cmd->add_option("--budget", adv_args.budget, "Per-step l2 budget B (normalised units)");
  adv_cmd->add_option("--epsilon", adv_args.epsilon, "Consistency tolerance");
  adv_cmd->add_option("--budget-reference", adv_args.budget_reference,
                      "Centre of the epsilon-illusory budget ball")
      ->check(CLI::IsMember({"true-state", "prediction"}));
  adv_cmd->add_option("--config", adv_args.config, "JSON training config overrides");
  adv_cmd->add_option("--out", adv_args.out)->required();
  adv_cmd->add_option("--seed", adv_args.seed);
  adv_cmd->add_option("--steps", adv_args.steps);

  DetectorArgs det_args;
  auto* det_cmd = app.add_subcommand("train-detector", "Fit and calibrate the detector");
  det_cmd->add_option("--env", det_args.env)->required()->check(CLI::IsMember(env_names));
  det_cmd->add_option("--victim", det_args.victim)->required();
  det_cmd->add_option("--config", det_args.config);
  det_cmd->add_option("--out", det_args.out)->required();
  det_cmd->add_option("--fpr", det_args.fpr, "Target false-positive rate")
      ->check(CLI::Range(0.0, 1.0));
  det_cmd->add_option("--seed", det_args.seed);

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run an experiment config");
  eval_cmd->add_option("--config", eval_args.config)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", eval_args.episodes, "Episodes per seed");
  eval_cmd->add_option("--seeds", eval_args.seeds);
  eval_cmd->add_option("--output-dir", eval_args.output_dir);
  eval_cmd->add_flag("--deterministic-victim", eval_args.deterministic_victim,
                     "Victim plays its mode action");
  eval_cmd->add_flag("--no-trajectories", eval_args.no_trajectories);

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Aggregate result files and rescore");
  report_cmd->add_option("inputs", report_inputs, "Result files or directories")->required();
  report_cmd->add_option("--out", report_out, "Write the report JSON here");

  std::string study_config, study_out;
  std::optional<std::uint64_t> study_seed;
  auto* export_cmd = app.add_subcommand("export-study-bundle", "Sample clips for the human study");
  export_cmd->add_option("--config", study_config)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out-dir", study_out)->required();
  export_cmd->add_option("--seed", study_seed, "Presentation seed");

  std::string responses, labels, stats_out;
  double alpha = 0.05;
  auto* stats_cmd = app.add_subcommand("study-stats", "Detection table and z-tests from responses");
  stats_cmd->add_option("--responses", responses)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", stats_out);
  stats_cmd->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*victim_cmd) TrainVictimCommand(victim_args);
    if (*adv_cmd) TrainAdversaryCommand(adv_args);
    if (*det_cmd) TrainDetectorCommand(det_args);
    if (*eval_cmd) EvaluateCommand(eval_args);
    if (*report_cmd) ReportCommand(report_inputs, report_out);
    if (*export_cmd) ExportStudyCommand(study_config, study_out, study_seed);
    if (*stats_cmd) StudyStatsCommand(responses, labels, stats_out, alpha);
  } catch (const UnsupportedError& e) {
    std::fprintf(stderr, "unsupported: %s\n", e.what());
    return kUnsupported;
  } catch (const TrainingFailure& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kTrainingFailed;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
