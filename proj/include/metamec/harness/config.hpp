#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "metamec/agents/architecture.hpp"
#include "metamec/env_vehicle.hpp"
#include "metamec/env_vr.hpp"
#include "metamec/errors.hpp"

namespace metamec {

using Json = nlohmann::ordered_json;

struct TrainingConfig {
  std::size_t episodes = 200;
  std::size_t eval_every = 10;
  std::size_t eval_episodes = 4;

  bool operator==(const TrainingConfig&) const = default;
};

struct EnvConfig {
  std::variant<VrConfig, VehicleConfig> block = VrConfig{};

  bool is_vr() const { return std::holds_alternative<VrConfig>(block); }
  std::string name() const { return is_vr() ? "vr" : "vehicle"; }
  const VrConfig& vr() const { return std::get<VrConfig>(block); }
  const VehicleConfig& vehicle() const { return std::get<VehicleConfig>(block); }

  bool operator==(const EnvConfig&) const = default;
};

struct ExperimentConfig {
  EnvConfig env;
  AgentConfig agent;
  TrainingConfig training;
  std::uint64_t seed = 0;
  std::string run_id = "run";
  std::string output_dir = "runs";

  void validate() const {
    std::visit([](const auto& e) { e.validate(); }, env.block);
    agent.validate();
    if (training.eval_every < 1) throw ConfigError("training.eval_every must be ≥ 1");
    if (training.eval_episodes < 1) throw ConfigError("training.eval_episodes must be ≥ 1");
    if (run_id.empty() || run_id.find_first_of(",\n\r\"") != std::string::npos)
      throw ConfigError("run_id must be non-empty and free of commas, quotes and newlines");
  }

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

/// Strict reader over one JSON object: every key must be consumed, and
/// errors carry the dotted field path.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  void read_positive_size(const std::string& key, std::size_t& out) {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(field(key) + ": expected a non-negative integer");
    seen_.insert(key);
    out = v.get<std::size_t>();
  }

  const Json* child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Fading fading_from_string(const std::string& s, const std::string& path) {
  if (s == "static") return Fading::static_gain;
  if (s == "rayleigh_block") return Fading::rayleigh_block;
  throw ConfigError(path + ": expected \"static\" or \"rayleigh_block\"");
}

inline std::string to_string(Fading f) { return f == Fading::static_gain ? "static" : "rayleigh_block"; }

inline VrUserProfile parse_profile(const Json& j, const std::string& path) {
  VrUserProfile u;
  ObjectReader r(j, path);
  r.read("fps", u.fps);
  r.read("delay_tolerance_ms", u.delay_tolerance_ms);
  r.read("energy_budget_j", u.energy_budget_j);
  r.read("capability", u.capability);
  r.read("mean_gain", u.mean_gain);
  r.read("tx_power", u.tx_power);
  r.read("scene_bits", u.scene_bits);
  r.read("workload", u.workload);
  r.finish();
  return u;
}

inline Json profile_to_json(const VrUserProfile& u) {
  return Json{{"fps", u.fps},
              {"delay_tolerance_ms", u.delay_tolerance_ms},
              {"energy_budget_j", u.energy_budget_j},
              {"capability", u.capability},
              {"mean_gain", u.mean_gain},
              {"tx_power", u.tx_power},
              {"scene_bits", u.scene_bits},
              {"workload", u.workload}};
}

inline VrSampling parse_sampling(const Json& j, const std::string& path) {
  VrSampling s;
  ObjectReader r(j, path);
  auto range = [&](const char* key, std::array<double, 2>& out) {
    r.read(key, out);
    if (out[0] > out[1]) throw ConfigError(r.field(key) + ": lower bound exceeds upper bound");
  };
  range("fps", s.fps);
  range("delay_tolerance_ms", s.delay_tolerance_ms);
  range("energy_budget_j", s.energy_budget_j);
  range("capability", s.capability);
  range("mean_gain", s.mean_gain);
  range("tx_power", s.tx_power);
  range("scene_bits", s.scene_bits);
  range("workload", s.workload);
  r.finish();
  return s;
}

inline Json sampling_to_json(const VrSampling& s) {
  return Json{{"fps", s.fps},
              {"delay_tolerance_ms", s.delay_tolerance_ms},
              {"energy_budget_j", s.energy_budget_j},
              {"capability", s.capability},
              {"mean_gain", s.mean_gain},
              {"tx_power", s.tx_power},
              {"scene_bits", s.scene_bits},
              {"workload", s.workload}};
}

inline VrConfig parse_vr(const Json& j, const std::string& path) {
  VrConfig c;
  ObjectReader r(j, path);
  r.read("preset", c.preset);
  r.read_positive_size("n_users", c.n_users);
  r.read_positive_size("channels", c.channels);
  r.read_positive_size("episode_length", c.episode_length);
  if (const Json* roster = r.child("roster")) {
    if (!roster->is_array()) throw ConfigError(r.field("roster") + ": expected an array");
    for (std::size_t i = 0; i < roster->size(); ++i)
      c.roster.push_back(parse_profile((*roster)[i], r.field("roster") + "[" + std::to_string(i) + "]"));
  }
  if (const Json* s = r.child("sampling")) c.sampling = parse_sampling(*s, r.field("sampling"));
  r.read("bandwidth_hz", c.bandwidth_hz);
  r.read("noise_density", c.noise_density);
  std::string fading = to_string(c.fading);
  r.read("fading", fading);
  c.fading = fading_from_string(fading, r.field("fading"));
  r.read("server_cycles", c.server_cycles);
  r.read("kappa", c.kappa);
  std::string reward = "binary";
  r.read("reward", reward);
  if (reward == "binary") c.reward = VrRewardMode::binary;
  else if (reward == "signed") c.reward = VrRewardMode::signed_unit;
  else throw ConfigError(r.field("reward") + ": expected \"binary\" or \"signed\"");
  r.finish();
  return c;
}

inline Json vr_to_json(const VrConfig& c) {
  Json j{{"preset", c.preset},         {"n_users", c.n_users},
         {"channels", c.channels},     {"episode_length", c.episode_length},
         {"bandwidth_hz", c.bandwidth_hz}, {"noise_density", c.noise_density},
         {"fading", to_string(c.fading)},  {"server_cycles", c.server_cycles},
         {"kappa", c.kappa},           {"reward", c.reward == VrRewardMode::binary ? "binary" : "signed"}};
  if (!c.roster.empty()) {
    Json roster = Json::array();
    for (const auto& u : c.roster) roster.push_back(profile_to_json(u));
    j["roster"] = roster;
  }
  if (c.sampling) j["sampling"] = sampling_to_json(*c.sampling);
  return j;
}

inline VehicleConfig parse_vehicle(const Json& j, const std::string& path) {
  VehicleConfig c;
  ObjectReader r(j, path);
  r.read("preset", c.preset);
  r.read_positive_size("m_vehicles", c.m_vehicles);
  r.read_positive_size("e_servers", c.e_servers);
  r.read_positive_size("levels", c.levels);
  r.read_positive_size("episode_length", c.episode_length);
  if (const Json* t = r.child("level_table")) {
    if (!t->is_array()) throw ConfigError(r.field("level_table") + ": expected an array");
    for (std::size_t i = 0; i < t->size(); ++i) {
      ObjectReader lr((*t)[i], r.field("level_table") + "[" + std::to_string(i) + "]");
      LevelEntry e{0.0, 0.0};
      lr.read("scene_bits", e.scene_bits);
      lr.read("accuracy", e.accuracy);
      lr.finish();
      c.level_table.push_back(e);
    }
    if (!r.has("levels")) c.levels = c.level_table.size();
  }
  r.read("base_level_bits", c.base_level_bits);
  r.read("bandwidth_hz", c.bandwidth_hz);
  r.read("noise_density", c.noise_density);
  r.read("tx_power", c.tx_power);
  r.read("near_gain", c.near_gain);
  r.read("far_gain", c.far_gain);
  std::string fading = to_string(c.fading);
  r.read("fading", fading);
  c.fading = fading_from_string(fading, r.field("fading"));
  r.read("extra_near_prob", c.extra_near_prob);
  r.read("server_cycles", c.server_cycles);
  r.read("detect_workload", c.detect_workload);
  r.finish();
  return c;
}

inline Json vehicle_to_json(const VehicleConfig& c) {
  Json j{{"preset", c.preset},
         {"m_vehicles", c.m_vehicles},
         {"e_servers", c.e_servers},
         {"levels", c.levels},
         {"episode_length", c.episode_length},
         {"base_level_bits", c.base_level_bits},
         {"bandwidth_hz", c.bandwidth_hz},
         {"noise_density", c.noise_density},
         {"tx_power", c.tx_power},
         {"near_gain", c.near_gain},
         {"far_gain", c.far_gain},
         {"fading", to_string(c.fading)},
         {"extra_near_prob", c.extra_near_prob},
         {"server_cycles", c.server_cycles},
         {"detect_workload", c.detect_workload}};
  if (!c.level_table.empty()) {
    Json t = Json::array();
    for (const auto& e : c.level_table) t.push_back(Json{{"scene_bits", e.scene_bits}, {"accuracy", e.accuracy}});
    j["level_table"] = t;
  }
  return j;
}

inline AgentConfig parse_agent(const Json& j, const std::string& path) {
  AgentConfig a;
  ObjectReader r(j, path);
  std::string algo = std::string(to_string(a.algorithm));
  r.read("algorithm", algo);
  a.algorithm = algorithm_from_string(algo);
  r.read("hidden", a.hidden);
  r.read("gamma", a.gamma);
  r.read("gae_lambda", a.gae_lambda);
  r.read("entropy_coef", a.entropy_coef);
  r.read("value_coef", a.value_coef);
  r.read("global_mix", a.global_mix);
  r.read("clipped_surrogate", a.clipped_surrogate);
  r.read("clip_epsilon", a.clip_epsilon);
  r.read("learning_rate", a.learning_rate);
  if (a.clipped_surrogate) a.update_epochs = 4;
  r.read_positive_size("update_epochs", a.update_epochs);
  r.read_positive_size("rollout_length", a.rollout_length);
  r.read("max_grad_norm", a.max_grad_norm);
  r.finish();
  return a;
}

inline Json agent_to_json(const AgentConfig& a) {
  return Json{{"algorithm", std::string(to_string(a.algorithm))},
              {"hidden", a.hidden},
              {"gamma", a.gamma},
              {"gae_lambda", a.gae_lambda},
              {"entropy_coef", a.entropy_coef},
              {"value_coef", a.value_coef},
              {"global_mix", a.global_mix},
              {"clipped_surrogate", a.clipped_surrogate},
              {"clip_epsilon", a.clip_epsilon},
              {"learning_rate", a.learning_rate},
              {"update_epochs", a.update_epochs},
              {"rollout_length", a.rollout_length},
              {"max_grad_norm", a.max_grad_norm}};
}

}  // namespace detail

inline EnvConfig parse_env_config(const Json& j, const std::string& path = "env") {
  if (!j.is_object() || j.size() != 1)
    throw ConfigError(path + ": expected exactly one of \"vr\" or \"vehicle\"");
  EnvConfig e;
  if (j.contains("vr")) e.block = detail::parse_vr(j.at("vr"), path + ".vr");
  else if (j.contains("vehicle")) e.block = detail::parse_vehicle(j.at("vehicle"), path + ".vehicle");
  else throw ConfigError(path + "." + j.begin().key() + ": unknown field");
  return e;
}

inline Json env_to_json(const EnvConfig& e) {
  if (e.is_vr()) return Json{{"vr", detail::vr_to_json(e.vr())}};
  return Json{{"vehicle", detail::vehicle_to_json(e.vehicle())}};
}

/// Parses and validates an experiment description; missing fields take defaults.
inline ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig c;
  detail::ObjectReader r(j, "");
  const Json* env = r.child("env");
  if (!env) throw ConfigError("env: required field missing");
  c.env = parse_env_config(*env);
  const Json* agent = r.child("agent");
  if (!agent) throw ConfigError("agent: required field missing");
  c.agent = detail::parse_agent(*agent, "agent");
  if (const Json* t = r.child("training")) {
    detail::ObjectReader tr(*t, "training");
    tr.read_positive_size("episodes", c.training.episodes);
    tr.read_positive_size("eval_every", c.training.eval_every);
    tr.read_positive_size("eval_episodes", c.training.eval_episodes);
    tr.finish();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
      throw ConfigError("seed: expected a non-negative integer");
  }
  r.read("seed", c.seed);
  r.read("run_id", c.run_id);
  r.read("output_dir", c.output_dir);
  r.finish();
  c.validate();
  return c;
}

inline Json config_to_json(const ExperimentConfig& c) {
  return Json{{"env", env_to_json(c.env)},
              {"agent", detail::agent_to_json(c.agent)},
              {"training",
               {{"episodes", c.training.episodes},
                {"eval_every", c.training.eval_every},
                {"eval_episodes", c.training.eval_episodes}}},
              {"seed", c.seed},
              {"run_id", c.run_id},
              {"output_dir", c.output_dir}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace metamec
