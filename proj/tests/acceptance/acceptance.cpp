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
// Acceptance suite. Prints one PASS/FAIL line per criterion on stdout;
// progress goes to stderr. Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirage/agents/victim.hpp"
#include "mirage/attacks/learned.hpp"
#include "mirage/attacks/tabular.hpp"
#include "mirage/detectors/hypothesis.hpp"
#include "mirage/estimators/kl.hpp"
#include "mirage/harness/checkpoint.hpp"
#include "mirage/harness/experiment.hpp"
#include "mirage/harness/pipeline.hpp"
#include "test_util.hpp"

namespace mirage {
namespace {

namespace fs = std::filesystem;
using attacks::AttackKind;
using attacks::TabularAttack;
using estimators::CategoricalDist;

constexpr double kBudget = 0.2;
constexpr double kTargetFpr = 0.03;

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class Verdicts {
 public:
  void Record(const std::string& criterion, bool pass, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", criterion.c_str(), detail.c_str());
    std::fflush(stdout);
    failures_ += pass ? 0 : 1;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

template <typename... Args>
std::string Format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

void Progress(const std::string& msg) {
  std::fprintf(stderr, "  %s\n", msg.c_str());
  std::fflush(stderr);
}

// Collects sub-check failures into one verdict line.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failed_.push_back(what);
  }
  bool ok() const { return failed_.empty(); }
  std::string Detail(const std::string& summary) const {
    if (failed_.empty()) return summary;
    std::string s = summary + "; failed:";
    for (const auto& f : failed_) s += " [" + f + "]";
    return s;
  }

 private:
  std::vector<std::string> failed_;
};

CategoricalDist Dist(double a, double b) {
  Vec v(2);
  v << a, b;
  return CategoricalDist(v);
}

int Draw(const CategoricalDist& p, Rng& rng) { return Uniform(rng, 0.0, 1.0) < p[0] ? 0 : 1; }

// ---------------------------------------------------------------------------

void OneStepOracle(Verdicts& out) {
  Stopwatch clock;
  envs::OneStepMdp env;
  const agents::Policy victim = testing::GreedyOneStepVictim(true);
  const double unattacked = agents::ExactOneStepReturn(victim);
  const double swap = attacks::ExactAttackedReturn(victim, TabularAttack::SwapEmission());
  const Mat perfect = TabularAttack::PerfectIllusoryEmission();
  const double illusory = attacks::ExactAttackedReturn(victim, perfect);
  const double kl_obs = estimators::ExactObservationKl(env, perfect);
  const double kl_traj = estimators::ExactTrajectoryKl(env, victim, perfect);
  const double seconds = clock.Seconds();

  Checks c;
  c.Expect(std::abs(unattacked - 1.0) <= 1e-12, "unattacked return");
  c.Expect(std::abs(swap) <= 1e-12, "swap return");
  c.Expect(std::abs(illusory - 1.0 / 6.0) <= 1e-12, "perfect-illusory return");
  c.Expect(std::abs(kl_obs) <= 1e-12 && std::abs(kl_traj) <= 1e-12, "perfect-illusory KL");
  c.Expect(seconds < 1.0, "runtime");
  out.Record("one-step-oracle", c.ok(),
             c.Detail(Format("returns %.15f / %.15f / %.15f, KL %.2e, %.3f s", unattacked, swap,
                             illusory, kl_traj, seconds)));
}

void DualSweep(Verdicts& out) {
  Stopwatch clock;
  envs::OneStepMdp env;
  const agents::Policy victim = testing::GreedyOneStepVictim(true);
  const double oracle_kl = estimators::ExactObservationKl(env, TabularAttack::SwapEmission());
  attacks::DualConfig dual;
  dual.step_size = 1.0;

  Checks c;
  std::ostringstream table;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 15; ++k) {
    const double eps = 0.02 * k;
    const attacks::ExactDualResult r = attacks::TrainEpsilonIllusoryExact(env, victim, eps, dual);
    Progress(Format("sweep eps %.2f: KL %.4f return %.4f lambda %.3g", eps, r.kl,
                    r.victim_return, r.lambda));
    table << Format(" %.2f:%.3f", eps, r.victim_return);
    c.Expect(r.kl <= eps + 0.01, Format("KL %.4f at eps %.2f", r.kl, eps));
    c.Expect(r.victim_return <= previous + 0.02, Format("return rises at eps %.2f", eps));
    if (eps >= oracle_kl) {
      c.Expect(std::abs(r.victim_return) <= 0.02, Format("return %.4f at eps %.2f", r.victim_return, eps));
    }
    previous = r.victim_return;
  }
  const double seconds = clock.Seconds();
  c.Expect(seconds < 600.0, "runtime");
  out.Record("dual-sweep", c.ok(),
             c.Detail(Format("unconstrained KL %.5f, %.1f s; returns", oracle_kl, seconds) +
                      table.str()));
}

// ---------------------------------------------------------------------------
// Continuous environments: train, calibrate, attack, score.

struct BudgetCheck {
  long steps = 0;
  long violations = 0;
  double max_deviation = 0.0;
};

// Rolls out attacked episodes until at least `min_steps` steps are logged.
BudgetCheck CheckBudget(const envs::Environment& env, const agents::Policy& victim,
                        attacks::Attack& attack, double budget, long min_steps) {
  BudgetCheck b;
  for (std::uint64_t batch = 0; b.steps < min_steps; ++batch) {
    const auto r = agents::EvaluateReturn(env, victim, &attack, 100, DeriveSeed(77, batch));
    for (const auto& traj : r.trajectories) {
      for (const auto& rec : traj.steps) {
        const double dev = (env.Normalize(rec.observation) - env.Normalize(rec.state)).norm();
        b.max_deviation = std::max(b.max_deviation, dev);
        b.violations += dev > budget + attacks::kBudgetTolerance ? 1 : 0;
        ++b.steps;
      }
    }
  }
  return b;
}

struct EnvOutcome {
  std::string env;
  double unattacked_rate = 0.0;
  std::map<std::string, harness::RunResult> runs;
  std::map<std::string, BudgetCheck> budgets;
};

std::string TrainAndSave(const envs::Environment& env, const agents::Policy& victim,
                         harness::AdversaryTrainingConfig config, const fs::path& path) {
  Stopwatch clock;
  nlohmann::json j = harness::TrainAdversary(env, victim, config);
  j["training"] = harness::ToJson(config);
  harness::WriteJsonFile(path, j);
  Progress(Format("%s: trained %s in %.0f s", env.spec().name.c_str(),
                  path.filename().string().c_str(), clock.Seconds()));
  return path.string();
}

EnvOutcome RunEnvironment(const std::string& name, const fs::path& work) {
  const auto env = envs::MakeEnvironment(name);
  const fs::path dir = work / name;
  EnvOutcome outcome;
  outcome.env = name;
  Stopwatch clock;

  harness::VictimCheckpoint victim;
  victim.env = name;
  victim.config = agents::DefaultVictimConfig(name);
  victim.policy = agents::TrainVictim(*env, victim.config, &victim.report);
  const fs::path victim_path = dir / "victim.json";
  harness::WriteJsonFile(victim_path, harness::ToJson(victim));
  Progress(Format("%s: victim return %.1f after %ld steps (%.0f s)", name.c_str(),
                  victim.report.evaluation_mean, victim.report.steps, clock.Seconds()));

  harness::DetectorTrainingConfig detector_config;
  detector_config.target_fpr = kTargetFpr;
  detector_config.seed = 7;
  const detectors::Detector detector = harness::TrainDetector(*env, victim.policy, detector_config);
  const fs::path detector_path = dir / "detector.json";
  harness::WriteJsonFile(detector_path, harness::DetectorCheckpointJson(name, detector));

  {
    const auto fresh = agents::EvaluateReturn(*env, victim.policy, nullptr, 1000, 4242);
    int hits = 0;
    for (const auto& traj : fresh.trajectories) hits += detector.Judge(*env, traj).attacked;
    outcome.unattacked_rate = hits / 1000.0;
  }

  harness::AdversaryTrainingConfig samdp = harness::DefaultAdversaryConfig(name, AttackKind::kSamdp);
  samdp.budget = kBudget;
  samdp.train.seed = 5;
  const std::string samdp_path = TrainAndSave(*env, victim.policy, samdp, dir / "samdp.json");

  harness::AdversaryTrainingConfig illusory =
      harness::DefaultAdversaryConfig(name, AttackKind::kEpsilonIllusory);
  illusory.budget = kBudget;
  illusory.train.seed = 5;
  illusory.architecture.budget_reference = attacks::BudgetReference::kPrediction;
  const std::string illusory_path =
      TrainAndSave(*env, victim.policy, illusory, dir / "epsilon_illusory.json");

  // Centred on the true state so that the norm budget applies; only used for
  // the budget invariant.
  harness::AdversaryTrainingConfig anchored = illusory;
  anchored.architecture.budget_reference = attacks::BudgetReference::kTrueState;
  anchored.train.total_steps = 50000;
  const std::string anchored_path =
      TrainAndSave(*env, victim.policy, anchored, dir / "epsilon_illusory_true_state.json");

  struct Planned {
    std::string label;
    AttackKind kind;
    bool budgeted;
    std::string checkpoint;
    int episodes_per_seed;
  };
  std::vector<Planned> plan = {{"identity", AttackKind::kIdentity, false, "", 200},
                               {"samdp", AttackKind::kSamdp, true, samdp_path, 100},
                               {"epsilon-illusory", AttackKind::kEpsilonIllusory, true,
                                illusory_path, 100},
                               {"perfect-illusory", AttackKind::kPerfectIllusory, false, "", 100}};
  // MNP needs a discrete victim.
  if (env->spec().action_space.kind == envs::ActionKind::kDiscrete) {
    plan.push_back({"mnp", AttackKind::kMnp, true, "", 100});
  }
  std::vector<harness::RunResult> results;
  for (const auto& p : plan) {
    harness::ExperimentConfig config;
    config.name = p.label;
    config.env = name;
    config.attack.kind = p.kind;
    if (p.budgeted) config.attack.budget = kBudget;
    config.attack.checkpoint = p.checkpoint;
    config.victim_checkpoint = victim_path.string();
    config.detector_checkpoint = detector_path.string();
    config.episodes_per_seed = p.episodes_per_seed;
    config.output_dir = (dir / "results").string();
    config.save_trajectories = false;
    results.push_back(harness::RunExperiment(config));
    const auto& r = results.back();
    Progress(Format("%s: %-16s return %9.1f detection %.3f (%.0f s)", name.c_str(),
                    p.label.c_str(), r.mean, r.detection_rate, clock.Seconds()));
  }
  harness::WriteJsonFile(dir / "report.json", harness::BuildReport(results));
  for (auto& r : results) outcome.runs[r.name] = r;

  std::vector<std::pair<std::string, harness::AttackSpec>> budgeted = {
      {"samdp", {AttackKind::kSamdp, kBudget, samdp_path, {}}},
      {"epsilon-illusory(true-state)", {AttackKind::kEpsilonIllusory, kBudget, anchored_path, {}}}};
  if (env->spec().action_space.kind == envs::ActionKind::kDiscrete) {
    budgeted.push_back({"mnp", {AttackKind::kMnp, kBudget, "", {}}});
  }
  for (const auto& [label, spec] : budgeted) {
    auto attack = harness::MakeAttack(*env, victim.policy, spec);
    outcome.budgets[label] = CheckBudget(*env, victim.policy, *attack, kBudget, 100000);
  }
  Progress(Format("%s: done in %.0f s", name.c_str(), clock.Seconds()));
  return outcome;
}

void DetectionPattern(const std::vector<EnvOutcome>& envs, double seconds, Verdicts& out) {
  Checks c;
  std::string summary;
  for (const auto& e : envs) {
    auto rate = [&](const std::string& label) { return e.runs.at(label).detection_rate; };
    summary += Format("%s unattacked %.3f identity %.3f samdp %.3f eps-illusory %.3f perfect %.3f",
                      e.env.c_str(), e.unattacked_rate, rate("identity"), rate("samdp"),
                      rate("epsilon-illusory"), rate("perfect-illusory"));
    if (e.runs.contains("mnp")) summary += Format(" mnp %.3f", rate("mnp"));
    summary += "; ";
    c.Expect(std::abs(e.unattacked_rate - kTargetFpr) <= 0.02, e.env + " unattacked");
    c.Expect(std::abs(rate("identity") - kTargetFpr) <= 0.02, e.env + " identity");
    c.Expect(rate("samdp") >= 0.9, e.env + " samdp");
    if (e.runs.contains("mnp")) c.Expect(rate("mnp") >= 0.9, e.env + " mnp");
    c.Expect(rate("epsilon-illusory") <= 0.1, e.env + " epsilon-illusory");
    c.Expect(rate("perfect-illusory") <= kTargetFpr + 0.03, e.env + " perfect-illusory");
  }
  c.Expect(seconds < 7200.0, "runtime");
  out.Record("detection-pattern", c.ok(), c.Detail(summary + Format("%.0f s", seconds)));
}

void AdjustedScores(const std::vector<EnvOutcome>& envs, Verdicts& out) {
  Checks c;
  std::string summary;
  for (const auto& e : envs) {
    auto adjusted = [&](const std::string& label) {
      return e.runs.at(label).detection_adjusted_score;
    };
    double strongest_detected = adjusted("samdp");
    summary += Format("%s samdp %.3f", e.env.c_str(), adjusted("samdp"));
    c.Expect(adjusted("samdp") <= 0.1, e.env + " samdp");
    if (e.runs.contains("mnp")) {
      summary += Format(" mnp %.3f", adjusted("mnp"));
      c.Expect(adjusted("mnp") <= 0.1, e.env + " mnp");
      strongest_detected = std::max(strongest_detected, adjusted("mnp"));
    }
    summary += Format(" eps-illusory %.3f (unadjusted %.3f); ", adjusted("epsilon-illusory"),
                      e.runs.at("epsilon-illusory").adversary_score);
    c.Expect(adjusted("epsilon-illusory") >= strongest_detected + 0.2, e.env + " epsilon-illusory");
  }
  out.Record("adjusted-score-collapse", c.ok(), c.Detail(summary));
}

void BudgetInvariant(const std::vector<EnvOutcome>& envs, Verdicts& out) {
  Checks c;
  std::string summary;
  for (const auto& e : envs) {
    for (const auto& [label, b] : e.budgets) {
      summary += Format("%s %s %ld steps %ld violations max %.6f; ", e.env.c_str(), label.c_str(),
                        b.steps, b.violations, b.max_deviation);
      c.Expect(b.steps >= 100000 && b.violations == 0, e.env + " " + label);
    }
  }
  out.Record("budget-invariant", c.ok(), c.Detail(summary));
}

// ---------------------------------------------------------------------------

void InformationTheory(Verdicts& out) {
  using detectors::Hypothesis;
  Checks c;
  c.Expect(detectors::BinaryRelativeEntropy(0.5, 0.5) == 0.0, "d(1/2, 1/2)");

  std::string summary;
  constexpr int kTrials = 100000;
  const std::vector<std::pair<CategoricalDist, CategoricalDist>> pairs = {
      {Dist(0.7, 0.3), Dist(0.4, 0.6)}, {Dist(0.9, 0.1), Dist(0.2, 0.8)},
      {Dist(0.5, 0.5), Dist(0.45, 0.55)}};
  Rng rng(1);
  for (const auto& [p1, p2] : pairs) {
    int false_alarm = 0, miss = 0;
    for (int i = 0; i < kTrials; ++i) {
      false_alarm += detectors::LlrDecide(p1, p2, Draw(p1, rng), 0.0).hypothesis == Hypothesis::kH1;
      miss += detectors::LlrDecide(p1, p2, Draw(p2, rng), 0.0).hypothesis == Hypothesis::kH0;
    }
    const double d = detectors::BinaryRelativeEntropy(static_cast<double>(false_alarm) / kTrials,
                                                      static_cast<double>(miss) / kTrials);
    const double kl = estimators::KlCategorical(p1, p2);
    summary += Format("d %.4f <= KL %.4f; ", d, kl);
    c.Expect(d <= kl + 0.02, Format("bound at KL %.4f", kl));
  }

  // Small per-measurement increments keep the boundary overshoot small, so
  // the realised error rates sit close to the configured ones.
  const CategoricalDist p1 = Dist(0.55, 0.45), p2 = Dist(0.45, 0.55);
  constexpr double kAlpha = 0.05, kBeta = 0.05;
  const auto bounds = detectors::WaldBoundaries::FromErrorRates(kAlpha, kBeta);
  constexpr int kWaldTrials = 20000;
  int type1 = 0, type2 = 0, undecided = 0;
  std::vector<int> stream(5000);
  for (int i = 0; i < kWaldTrials; ++i) {
    for (int& q : stream) q = Draw(p1, rng);
    const auto under_h0 = detectors::WaldSequential(p1, p2, stream, bounds);
    type1 += under_h0.hypothesis == Hypothesis::kH1;
    for (int& q : stream) q = Draw(p2, rng);
    const auto under_h1 = detectors::WaldSequential(p1, p2, stream, bounds);
    type2 += under_h1.hypothesis == Hypothesis::kH0;
    undecided += (under_h0.hypothesis == Hypothesis::kUndecided) +
                 (under_h1.hypothesis == Hypothesis::kUndecided);
  }
  const double a = static_cast<double>(type1) / kWaldTrials;
  const double b = static_cast<double>(type2) / kWaldTrials;
  summary += Format("Wald alpha %.4f beta %.4f (configured %.2f, %.2f), %d undecided", a, b,
                    kAlpha, kBeta, undecided);
  c.Expect(std::abs(a - kAlpha) <= 0.02 && std::abs(b - kBeta) <= 0.02, "Wald error rates");
  out.Record("information-theory", c.ok(), c.Detail(summary));
}

void Estimators(Verdicts& out) {
  Checks c;
  envs::OneStepMdp env;
  const double hand = std::log(2.0) / 3.0;
  const double kl = estimators::KlCategorical(Dist(1.0 / 3.0, 2.0 / 3.0), Dist(2.0 / 3.0, 1.0 / 3.0));
  const double swap = estimators::ExactObservationKl(env, TabularAttack::SwapEmission());
  c.Expect(std::abs(kl - hand) <= 1e-12, "kl_categorical hand value");
  c.Expect(std::abs(swap - hand) <= 1e-12, "swap-attack KL");

  const auto pool = agents::EvaluateReturn(env, testing::GreedyOneStepVictim(), nullptr, 4000, 6)
                        .trajectories;
  const estimators::StateSampler sampler = estimators::MarginalStateSampler(env, pool);
  Rng rng(7);
  int below = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    Mat nu(2, 2);
    for (int s = 0; s < 2; ++s) {
      const double p = Uniform(rng, 0.05, 0.95);
      nu(s, 0) = p;
      nu(s, 1) = 1.0 - p;
    }
    TabularAttack attack(AttackKind::kEpsilonIllusory, nu);
    const auto est = estimators::McCrossEntropyUpper(attack, pool, sampler, 4000, rng);
    const double gap = (est.value - estimators::ExactCrossEntropy(env, nu)) / est.standard_error;
    worst_gap = std::min(worst_gap, gap);
    below += gap < -3.0 ? 1 : 0;
  }
  c.Expect(below == 0, Format("%d of 50 estimates more than 3 SE below", below));
  out.Record("estimators", c.ok(),
             c.Detail(Format("kl %.15f vs %.15f; bound holds for %d/50 attacks, worst gap %.2f SE",
                             kl, hand, 50 - below, worst_gap)));
}

}  // namespace
}  // namespace mirage

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string work_dir = "acceptance_work";
  std::vector<std::string> envs = {"cartpole", "pendulum"};
  bool skip_training = false;
  app.add_option("--work-dir", work_dir, "Directory for checkpoints and results");
  app.add_option("--envs", envs, "Continuous environments to run")->check(
      CLI::IsMember({"cartpole", "pendulum"}));
  app.add_flag("--skip-training", skip_training,
               "Only run the criteria that need no trained agents");
  CLI11_PARSE(app, argc, argv);

  using namespace mirage;
  Verdicts verdicts;
  OneStepOracle(verdicts);
  DualSweep(verdicts);
  InformationTheory(verdicts);
  Estimators(verdicts);
  if (!skip_training) {
    Stopwatch clock;
    std::vector<EnvOutcome> outcomes;
    try {
      for (const auto& name : envs) outcomes.push_back(RunEnvironment(name, work_dir));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "training pipeline failed: %s\n", e.what());
      verdicts.Record("detection-pattern", false, e.what());
      verdicts.Record("adjusted-score-collapse", false, e.what());
      verdicts.Record("budget-invariant", false, e.what());
      return 1;
    }
    DetectionPattern(outcomes, clock.Seconds(), verdicts);
    AdjustedScores(outcomes, verdicts);
    BudgetInvariant(outcomes, verdicts);
  }
  std::printf("%d criteria failed\n", verdicts.failures());
  return verdicts.failures() == 0 ? 0 : 1;
}
