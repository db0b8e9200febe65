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

#include "mirage/harness/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "mirage/attacks/perfect_illusory.hpp"
#include "mirage/attacks/tabular.hpp"

namespace mirage::harness {

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

nlohmann::json ToJson(const VictimCheckpoint& c) {
  return {{"format", "mirage-victim/1"},
          {"env", c.env},
          {"train_config", agents::ToJson(c.config)},
          {"evaluation",
           {{"mean", c.report.evaluation_mean},
            {"stddev", c.report.evaluation_stddev},
            {"steps", c.report.steps},
            {"competent", c.report.competent}}},
          {"policy", c.policy.ToJson()}};
}

VictimCheckpoint VictimCheckpointFromJson(const nlohmann::json& j) {
  if (j.value("format", "") != "mirage-victim/1") {
    throw std::invalid_argument("not a victim checkpoint");
  }
  VictimCheckpoint c;
  c.env = j.at("env").get<std::string>();
  c.config = agents::TrainConfigFromJson(j.at("train_config"));
  const auto& e = j.at("evaluation");
  c.report.evaluation_mean = e.at("mean").get<double>();
  c.report.evaluation_stddev = e.at("stddev").get<double>();
  c.report.steps = e.at("steps").get<long>();
  c.report.competent = e.at("competent").get<bool>();
  c.policy = agents::Policy::FromJson(j.at("policy"));
  return c;
}

nlohmann::json ToJson(const AttackSpec& s) {
  nlohmann::json j;
  j["kind"] = attacks::ToString(s.kind);
  j["budget"] = s.budget ? nlohmann::json(*s.budget) : nlohmann::json(nullptr);
  if (!s.checkpoint.empty()) j["checkpoint"] = s.checkpoint;
  if (s.kind == attacks::AttackKind::kMnp) {
    j["mnp"] = {{"sphere_samples", s.mnp.sphere_samples},
                {"refinement_steps", s.mnp.refinement_steps},
                {"refinement_jitter", s.mnp.refinement_jitter}};
  }
  return j;
}

AttackSpec AttackSpecFromJson(const nlohmann::json& j) {
  AttackSpec s;
  s.kind = attacks::AttackKindFromString(j.at("kind").get<std::string>());
  if (j.contains("budget") && !j.at("budget").is_null()) s.budget = j.at("budget").get<double>();
  s.checkpoint = j.value("checkpoint", "");
  if (j.contains("mnp")) {
    const auto& m = j.at("mnp");
    s.mnp.sphere_samples = m.value("sphere_samples", s.mnp.sphere_samples);
    s.mnp.refinement_steps = m.value("refinement_steps", s.mnp.refinement_steps);
    s.mnp.refinement_jitter = m.value("refinement_jitter", s.mnp.refinement_jitter);
  }
  return s;
}

namespace {

using attacks::AttackKind;

nlohmann::json LoadAttackCheckpoint(const AttackSpec& spec, const envs::Environment& env) {
  if (spec.checkpoint.empty()) {
    throw std::invalid_argument("attack '" + attacks::ToString(spec.kind) +
                                "' needs a trained checkpoint");
  }
  nlohmann::json j = ReadJsonFile(spec.checkpoint);
  if (j.value("env", "") != env.spec().name) {
    throw std::invalid_argument("attack checkpoint '" + spec.checkpoint + "' is for '" +
                                j.value("env", "?") + "', not '" + env.spec().name + "'");
  }
  if (j.value("kind", "") != attacks::ToString(spec.kind)) {
    throw std::invalid_argument("attack checkpoint '" + spec.checkpoint + "' holds a '" +
                                j.value("kind", "?") + "' attack");
  }
  return j;
}

std::unique_ptr<attacks::Attack> MakeOneStepAttack(const envs::Environment& env,
                                                   const AttackSpec& spec) {
  if (spec.budget) {
    throw std::invalid_argument("one-step observations are categorical; budgets do not apply");
  }
  using attacks::TabularAttack;
  switch (spec.kind) {
    case AttackKind::kIdentity:
      return std::make_unique<attacks::IdentityAttack>();
    case AttackKind::kSamdp:
      return std::make_unique<TabularAttack>(spec.kind, TabularAttack::SwapEmission());
    case AttackKind::kPerfectIllusory:
      return std::make_unique<TabularAttack>(spec.kind,
                                             TabularAttack::PerfectIllusoryEmission());
    case AttackKind::kEpsilonIllusory:
      return std::make_unique<TabularAttack>(
          TabularAttack::FromJson(LoadAttackCheckpoint(spec, env)));
    case AttackKind::kMnp:
      break;
  }
  throw UnsupportedError("MNP perturbs real-valued observations; one-step has none");
}

}  // namespace

std::unique_ptr<attacks::Attack> MakeAttack(const envs::Environment& env,
                                            const agents::Policy& victim,
                                            const AttackSpec& spec) {
  if (env.spec().name == "one-step") return MakeOneStepAttack(env, spec);
  auto need_budget = [&] {
    if (!spec.budget) {
      throw std::invalid_argument("attack '" + attacks::ToString(spec.kind) +
                                  "' needs a budget");
    }
    return attacks::AttackBudget(*spec.budget);
  };
  switch (spec.kind) {
    case AttackKind::kIdentity:
      return std::make_unique<attacks::IdentityAttack>();
    case AttackKind::kMnp:
      return std::make_unique<attacks::MnpAttack>(victim, need_budget(), spec.mnp);
    case AttackKind::kPerfectIllusory:
      return std::make_unique<attacks::PerfectIllusoryAttack>(env);
    case AttackKind::kSamdp:
    case AttackKind::kEpsilonIllusory: {
      auto attack = std::make_unique<attacks::LearnedAttack>(
          attacks::LearnedAttack::FromJson(env, LoadAttackCheckpoint(spec, env)));
      const auto trained = attack->budget();
      if (spec.budget && (!trained || trained->radius != *spec.budget)) {
        throw std::invalid_argument("attack checkpoint was trained for a different budget");
      }
      return attack;
    }
  }
  throw std::invalid_argument("unknown attack kind");
}

}  // namespace mirage::harness
