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

#include "mirage/attacks/learned.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mirage::attacks {
namespace {

Vec ClipToUnitBall(const Vec& v) {
  const double n = v.norm();
  return n > 1.0 ? Vec(v / n) : v;
}

Vec ClipToBox(const Vec& v) { return v.cwiseMax(-1.0).cwiseMin(1.0); }

Vec DeadZone(const Vec& v, double width) {
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::max(std::abs(v[i]) - width, 0.0) / (1.0 - width);
    out[i] = std::copysign(m, v[i]);
  }
  return out;
}

}  // namespace

std::string ToString(BudgetReference r) {
  return r == BudgetReference::kTrueState ? "true-state" : "prediction";
}

BudgetReference BudgetReferenceFromString(const std::string& s) {
  if (s == "true-state") return BudgetReference::kTrueState;
  if (s == "prediction") return BudgetReference::kPrediction;
  throw std::invalid_argument("unknown budget reference '" + s + "'");
}

LearnedAttack::LearnedAttack(const envs::Environment& env, LearnedAttackSpec spec,
                             agents::Policy policy)
    : env_(env), spec_(std::move(spec)), policy_(std::move(policy)) {
  if (spec_.kind != AttackKind::kSamdp && spec_.kind != AttackKind::kEpsilonIllusory) {
    throw std::invalid_argument("LearnedAttack: kind must be samdp or epsilon-illusory");
  }
  if (spec_.kind == AttackKind::kSamdp && !spec_.budget) {
    throw std::invalid_argument("LearnedAttack: samdp needs a budget");
  }
  if (spec_.epsilon < 0.0) throw std::invalid_argument("LearnedAttack: epsilon < 0");
  if (!(spec_.dead_zone >= 0.0 && spec_.dead_zone < 1.0)) {
    throw std::invalid_argument("LearnedAttack: dead zone must lie in [0, 1)");
  }
  if (policy_.descriptor().input_dim != FeatureDim(env, spec_.kind) ||
      policy_.action_dim() != env.spec().state_dim) {
    throw std::invalid_argument("LearnedAttack: policy shape does not match environment");
  }
}

int LearnedAttack::FeatureDim(const envs::Environment& env, AttackKind kind) {
  const int d = env.spec().state_dim;
  return kind == AttackKind::kEpsilonIllusory ? 2 * d + 1 : d;
}

agents::Policy LearnedAttack::MakePolicy(const envs::Environment& env,
                                         const LearnedAttackSpec& spec, Rng& rng) {
  const int d = env.spec().state_dim;
  agents::PolicyDescriptor desc;
  desc.architecture = agents::Architecture::kMlp;
  desc.input_dim = FeatureDim(env, spec.kind);
  desc.hidden = spec.hidden;
  desc.action_space = envs::ActionSpace::Box(Vec::Constant(d, -1.0), Vec::Constant(d, 1.0));
  desc.initial_log_std = spec.initial_log_std;
  return agents::Policy(desc, rng);
}

void LearnedAttack::BeginEpisode(const envs::Environment&, Rng&) {
  prediction_.resize(0);
  last_emission_.resize(0);
}

Vec LearnedAttack::Features(const Vec& normalized_state, int t, Rng& rng) {
  if (spec_.kind == AttackKind::kSamdp) return normalized_state;
  first_step_ = t == 0 || last_emission_.size() == 0;
  if (first_step_) {
    prediction_ = env_.Normalize(env_.InitialMean());
  } else {
    prediction_ = env_.Normalize(
        env_.TransitionSample(env_.Denormalize(last_emission_), last_action_, rng));
  }
  const Eigen::Index d = normalized_state.size();
  Vec f(2 * d + 1);
  f << normalized_state, prediction_, first_step_ ? 1.0 : 0.0;
  return f;
}

Vec LearnedAttack::Apply(const Vec& normalized_state, const Vec& delta) {
  const Vec unit = ClipToBox(delta);
  Vec o;
  if (spec_.kind == AttackKind::kSamdp) {
    o = normalized_state + spec_.budget->radius * ClipToUnitBall(unit);
  } else {
    const double reach = spec_.budget ? spec_.budget->radius : 1.0;
    const Vec& base = first_step_ ? normalized_state : prediction_;
    o = base + reach * DeadZone(unit, spec_.dead_zone);
    if (first_step_) o = env_.Normalize(env_.ProjectToInitialSupport(env_.Denormalize(o)));
    if (spec_.budget) {
      const Vec center =
          spec_.budget_reference == BudgetReference::kTrueState ? normalized_state : base;
      o = ProjectToBall(center, o, spec_.budget->radius);
    }
    // Any first observation inside the initial support is as likely as the
    // true one, so the t = 0 violation is the distance to that support.
    if (first_step_) {
      prediction_ = env_.Normalize(env_.ProjectToInitialSupport(env_.Denormalize(o)));
    }
  }
  last_emission_ = o;
  return o;
}

Vec LearnedAttack::Emit(const Vec& normalized_state, int t, Rng& rng) {
  const Vec f = Features(normalized_state, t, rng);
  return Apply(normalized_state, policy_.Sample(f, rng).value);
}

nlohmann::json LearnedAttack::ToJson() const {
  nlohmann::json j;
  j["kind"] = attacks::ToString(spec_.kind);
  j["env"] = env_.spec().name;
  j["budget"] = spec_.budget ? nlohmann::json(spec_.budget->radius) : nlohmann::json(nullptr);
  j["epsilon"] = spec_.epsilon;
  j["budget_reference"] = ToString(spec_.budget_reference);
  j["dead_zone"] = spec_.dead_zone;
  j["final_lambda"] = final_lambda;
  j["measured_kl"] = measured_kl;
  j["policy"] = policy_.ToJson();
  return j;
}

LearnedAttack LearnedAttack::FromJson(const envs::Environment& env, const nlohmann::json& j) {
  if (j.at("env").get<std::string>() != env.spec().name) {
    throw std::invalid_argument("attack checkpoint was trained on '" +
                                j.at("env").get<std::string>() + "', not '" +
                                env.spec().name + "'");
  }
  LearnedAttackSpec spec;
  spec.kind = AttackKindFromString(j.at("kind").get<std::string>());
  if (!j.at("budget").is_null()) spec.budget = AttackBudget(j.at("budget").get<double>());
  spec.epsilon = j.at("epsilon").get<double>();
  spec.budget_reference = BudgetReferenceFromString(j.at("budget_reference").get<std::string>());
  spec.dead_zone = j.value("dead_zone", spec.dead_zone);
  agents::Policy policy = agents::Policy::FromJson(j.at("policy"));
  spec.hidden = policy.descriptor().hidden;
  LearnedAttack attack(env, spec, std::move(policy));
  attack.final_lambda = j.at("final_lambda").get<double>();
  attack.measured_kl = j.at("measured_kl").get<double>();
  return attack;
}

AdversaryTask::AdversaryTask(const envs::Environment& env, const agents::Policy& victim,
                             LearnedAttack& shell, DualState* dual, double lambda_cap)
    : env_(env), victim_(victim), shell_(shell), dual_(dual), lambda_cap_(lambda_cap) {}

int AdversaryTask::ObservationDim() const {
  return LearnedAttack::FeatureDim(env_, shell_.kind());
}

envs::ActionSpace AdversaryTask::ActionSpace() const {
  return shell_.policy().descriptor().action_space;
}

Vec AdversaryTask::Reset(Rng& rng) {
  state_ = env_.Reset(rng);
  t_ = 0;
  shell_.BeginEpisode(env_, rng);
  return shell_.Features(env_.Normalize(state_), t_, rng);
}

agents::TaskStep AdversaryTask::Step(const envs::Action& action, Rng& rng) {
  const Vec s = env_.Normalize(state_);
  const Vec o = shell_.Apply(s, action.value);
  const envs::Action victim_action = victim_.Sample(o, rng);
  shell_.ObserveAction(victim_action);
  envs::StepResult r = env_.Step(state_, victim_action, t_, rng);
  ++t_;
  state_ = std::move(r.state);

  double reward = -r.reward;
  if (dual_ != nullptr) {
    const double violation = (o - shell_.prediction()).squaredNorm();
    reward = -r.reward - dual_->lambda * (violation - dual_->epsilon);
    dual_->window.Push(violation);
    if (r.done) {
      const double estimate = estimators::SlidingKlSurrogate(dual_->window);
      *dual_ = DualUpdate(*dual_, estimate);
      dual_trace_.emplace_back(dual_->lambda, estimate);
      if (dual_->lambda > lambda_cap_) {
        std::ostringstream msg;
        msg << "dual ascent diverged: lambda " << dual_->lambda << " exceeds cap "
            << lambda_cap_ << " (window estimate " << estimate << ", epsilon "
            << dual_->epsilon << ")";
        throw TrainingFailure(msg.str());
      }
    }
  }
  agents::TaskStep step{Vec(), reward, r.done, r.truncated};
  // After the last step the next features are only needed for bootstrapping
  // a truncated episode; they are computed the same way.
  step.observation = shell_.Features(env_.Normalize(state_), t_, rng);
  return step;
}

LearnedAttack TrainSamdpAdversary(const envs::Environment& env, const agents::Policy& victim,
                                  AttackBudget budget, const agents::TrainConfig& config,
                                  const LearnedAttackSpec& architecture) {
  LearnedAttackSpec spec = architecture;
  spec.kind = AttackKind::kSamdp;
  spec.budget = budget;
  spec.epsilon = 0.0;
  Rng init_rng(DeriveSeed(config.seed, 0xad5a));
  LearnedAttack attack(env, spec, LearnedAttack::MakePolicy(env, spec, init_rng));
  AdversaryTask task(env, victim, attack, nullptr, 0.0);
  agents::TrainPolicy(task, attack.policy(), config);
  return attack;
}

LearnedAttack TrainEpsilonIllusory(const envs::Environment& env, const agents::Policy& victim,
                                   double epsilon, std::optional<AttackBudget> budget,
                                   const DualConfig& dual_config,
                                   const agents::TrainConfig& train_config,
                                   const LearnedAttackSpec& architecture,
                                   EpsilonIllusoryReport* report) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("TrainEpsilonIllusory: epsilon < 0");
  LearnedAttackSpec spec = architecture;
  spec.kind = AttackKind::kEpsilonIllusory;
  spec.budget = budget;
  spec.epsilon = epsilon;
  Rng init_rng(DeriveSeed(train_config.seed, 0xe1e1));
  LearnedAttack attack(env, spec, LearnedAttack::MakePolicy(env, spec, init_rng));

  DualState dual;
  dual.lambda = dual_config.initial_lambda;
  dual.epsilon = epsilon;
  dual.step_size = dual_config.step_size;
  dual.window = estimators::SlidingWindow(dual_config.window);
  AdversaryTask task(env, victim, attack, &dual, dual_config.lambda_cap);
  agents::TrainPolicy(task, attack.policy(), train_config);

  attack.final_lambda = dual.lambda;
  attack.measured_kl = estimators::SlidingKlSurrogate(dual.window);
  if (report != nullptr) {
    report->final_lambda = dual.lambda;
    report->final_window_kl = attack.measured_kl;
    report->dual_trace = task.dual_trace();
  }
  return attack;
}

}  // namespace mirage::attacks
