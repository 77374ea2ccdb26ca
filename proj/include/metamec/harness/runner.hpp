#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metamec/agents/agent.hpp"
#include "metamec/env_vehicle.hpp"
#include "metamec/env_vr.hpp"
#include "metamec/harness/config.hpp"
#include "metamec/harness/metrics.hpp"

namespace metamec {

/// Runtime-selected environment behind the generic step interface.
class Environment {
 public:
  Environment(const EnvConfig& cfg, std::uint64_t seed) : env_(make(cfg, seed)) {}

  TaskLayout layout() const {
    return std::visit([](const auto& e) { return e.layout(); }, env_);
  }
  Observation reset() {
    return std::visit([](auto& e) { return e.reset_generic(); }, env_);
  }
  GenericStep step(const JointAction& a) {
    return std::visit([&](auto& e) { return e.step_generic(a); }, env_);
  }
  MetricList episode_metrics() const {
    return std::visit([](const auto& e) { return e.episode_metrics(); }, env_);
  }

 private:
  static std::variant<VrEnv, VehicleEnv> make(const EnvConfig& cfg, std::uint64_t seed) {
    if (cfg.is_vr()) return VrEnv(cfg.vr(), seed);
    return VehicleEnv(cfg.vehicle(), seed);
  }

  std::variant<VrEnv, VehicleEnv> env_;
};

/// Names of the evaluation metrics each environment reports.
inline std::vector<std::string> eval_metric_names(const EnvConfig& env) {
  if (env.is_vr()) return {"success_rate"};
  return {"mean_delay_ms", "mean_accuracy"};
}

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

using EvalSummary = std::map<std::string, MetricSummary>;

/// Seed of the held-out evaluation environment for a run seed. Identical for
/// every algorithm, so evaluations are paired.
inline std::uint64_t eval_env_seed(std::uint64_t run_seed) { return RngStream(run_seed, "eval/env").next_u64(); }

/// Greedy (argmax) rollouts of `agent` on a fresh environment; the random
/// baseline keeps acting uniformly. Does not modify the agent.
inline EvalSummary evaluate(const Agent& agent, const EnvConfig& env_config, std::size_t episodes, std::uint64_t seed) {
  if (episodes == 0) throw InvalidArgument("evaluate: need at least one episode");
  Environment env(env_config, eval_env_seed(seed));
  if (!(env.layout() == agent.architecture().layout))
    throw ConfigError("evaluate: agent was built for a different environment layout");
  RngStream rng(seed, "eval/act");
  std::map<std::string, std::vector<double>> samples;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset();
    for (;;) {
      const auto decision = agent.act(obs, rng, /*greedy=*/true);
      GenericStep s = env.step(decision.actions);
      obs = std::move(s.next);
      if (s.terminal) break;
    }
    for (const auto& [name, v] : env.episode_metrics()) samples[name].push_back(v);
  }
  EvalSummary out;
  for (const auto& [name, xs] : samples) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    out[name] = {mean, xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0};
  }
  return out;
}

struct TrainResult {
  Agent agent;
  std::vector<MetricRow> rows;
  std::optional<std::string> divergence;  // set when training aborted
};

/// Called after every update with the 1-based episode count and the agent.
using UpdateObserver = std::function<void(std::size_t episode, const Agent&)>;

inline Agent make_agent(const ExperimentConfig& cfg) {
  const Environment probe(cfg.env, 0);
  return Agent(cfg.agent, probe.layout(), RngStream(cfg.seed, "agent/init"));
}

/// Collects rollouts of `rollout_length` steps (rollouts may span episodes)
/// and performs one update per rollout. Every `eval_every` episodes a greedy
/// evaluation is appended to the metric rows. Deterministic in (config, seed).
inline TrainResult train(const ExperimentConfig& cfg, const UpdateObserver& observer = nullptr) {
  cfg.validate();
  Environment env(cfg.env, cfg.seed);
  TrainResult result{make_agent(cfg), {}, std::nullopt};
  Agent& agent = result.agent;
  const Architecture& arch = agent.architecture();
  RngStream act_rng(cfg.seed, "agent/act");
  const std::string algo(to_string(cfg.agent.algorithm));
  const std::string env_name = cfg.env.name();
  auto row = [&](std::size_t episode, std::string metric, double value) {
    result.rows.push_back({cfg.run_id, algo, env_name, cfg.seed, static_cast<std::int64_t>(episode), std::move(metric), value});
  };

  Rollout rollout;
  std::vector<double> episode_reward(arch.reward_length(), 0.0);
  std::optional<UpdateStats> last_stats;

  try {
    for (std::size_t episode = 1; episode <= cfg.training.episodes; ++episode) {
      Observation obs = env.reset();
      std::fill(episode_reward.begin(), episode_reward.end(), 0.0);
      for (;;) {
        const ActorDecision d = agent.act(obs, act_rng);
        GenericStep s = env.step(d.actions);
        Transition tr{std::move(obs), d.choices, d.log_probs, arch.reward_vector(s.entity_task_rewards, s.global_reward),
                      s.terminal};
        for (std::size_t h = 0; h < tr.rewards.size(); ++h) episode_reward[h] += tr.rewards[h];
        rollout.steps.push_back(std::move(tr));
        obs = std::move(s.next);
        if (rollout.steps.size() >= cfg.agent.rollout_length) {
          if (!rollout.steps.back().terminal) rollout.bootstrap = obs;
          if (agent.learns()) last_stats = agent.update(rollout);
          rollout = Rollout{};
          if (observer) observer(episode, agent);
        }
        if (s.terminal) break;
      }

      if (last_stats) {
        row(episode, "actor_loss", last_stats->actor_loss);
        row(episode, "critic_loss", last_stats->critic_loss);
        row(episode, "entropy", last_stats->entropy);
      }
      for (std::size_t h = 0; h < episode_reward.size(); ++h)
        row(episode, "reward_head_" + std::to_string(h), episode_reward[h]);

      if (episode % cfg.training.eval_every == 0) {
        for (const auto& [name, summary] : evaluate(agent, cfg.env, cfg.training.eval_episodes, cfg.seed))
          row(episode, name, summary.mean);
      }
    }
  } catch (const DivergenceError& e) {
    result.divergence = e.what();
  }
  return result;
}

}  // namespace metamec
