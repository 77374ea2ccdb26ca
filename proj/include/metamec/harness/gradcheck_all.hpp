#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "metamec/agents/agent.hpp"
#include "metamec/gradcheck.hpp"
#include "metamec/harness/runner.hpp"

namespace metamec {

struct GradCheckEntry {
  std::string architecture;  // e.g. "uut/vehicle/clipped"
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
};

namespace detail {

/// Finite-difference check of one agent's total training loss on a short
/// on-policy rollout, at a randomized parameter draw.
inline double gradcheck_agent(AgentConfig acfg, const EnvConfig& env_cfg, std::uint64_t seed, double h) {
  Environment env(env_cfg, seed);
  Agent agent(acfg, env.layout(), RngStream(seed, "gradcheck/init"));

  // Xavier weights with random (non-zero) biases so every bias gradient is exercised.
  AgentParams p = agent.params();
  RngStream jitter(seed, "gradcheck/bias");
  auto jitter_biases = [&](MlpParams& net) {
    for (auto& b : net.biases)
      for (double& x : b) x = jitter.uniform(-0.2, 0.2);
  };
  for (auto& a : p.actors) jitter_biases(a);
  jitter_biases(p.critic);
  if (p.global_critic) jitter_biases(*p.global_critic);
  agent.set_params(p);

  const Architecture& arch = agent.architecture();
  RngStream act(seed, "gradcheck/act");
  Rollout rollout;
  Observation obs = env.reset();
  for (std::size_t t = 0; t < 6; ++t) {
    const ActorDecision d = agent.act(obs, act);
    GenericStep s = env.step(d.actions);
    Transition tr{obs, d.choices, d.log_probs, arch.reward_vector(s.entity_task_rewards, s.global_reward), t == 2};
    // Off-policy behaviour log-probs put some surrogate ratios outside the clip range.
    if (acfg.clipped_surrogate)
      for (auto& lp : tr.log_probs)
        for (double& x : lp) x += act.uniform(-0.5, 0.5);
    rollout.steps.push_back(std::move(tr));
    obs = std::move(s.next);
  }
  rollout.bootstrap = obs;

  const PreparedBatch batch = agent.prepare(rollout);
  const std::size_t actor_count = arch.actors.size();
  const bool global = arch.global_head;
  MultiNetLoss loss = [&](const std::vector<MlpParams>& nets, std::vector<GradBuffer>* grads) {
    return agent.loss(AgentParams::unflatten(nets, actor_count, global), batch, grads);
  };
  // Actors, value critic and global critic contribute separate loss terms.
  NetTermLoss term = [&](const std::vector<MlpParams>& nets, std::size_t net) {
    UpdateStats stats;
    agent.loss(AgentParams::unflatten(nets, actor_count, global), batch, nullptr, &stats);
    if (net < actor_count) return stats.actor_loss;
    if (net == actor_count) {
      double c = 0.0;
      for (double x : stats.critic_losses) c += x;
      return c;
    }
    return stats.global_critic_loss;
  };
  return finite_diff_check(loss, term, agent.params().flatten(), h);
}

}  // namespace detail

/// Finite-difference check of every learning architecture (plain and
/// clipped-surrogate) on both environments at three parameter draws.
/// Uses a 16-16 trunk to keep the O(parameters) difference sweep cheap.
inline GradCheckReport gradcheck_all(double h = 1e-5, std::size_t draws = 3) {
  GradCheckReport report;
  VrConfig vr;
  VehicleConfig veh;
  const std::vector<std::pair<std::string, EnvConfig>> envs = {{"vr", EnvConfig{vr}}, {"vehicle", EnvConfig{veh}}};
  for (Algorithm algo : {Algorithm::traditional, Algorithm::user_centered, Algorithm::task_centered, Algorithm::uut}) {
    for (bool clipped : {false, true}) {
      for (const auto& [env_name, env_cfg] : envs) {
        AgentConfig acfg;
        acfg.algorithm = algo;
        acfg.hidden = {16, 16};
        acfg.clipped_surrogate = clipped;
        double worst = 0.0;
        for (std::size_t d = 0; d < draws; ++d)
          worst = std::max(worst, detail::gradcheck_agent(acfg, env_cfg, 1000 + d, h));
        report.entries.push_back(
            {std::string(to_string(algo)) + "/" + env_name + (clipped ? "/clipped" : ""), worst});
        report.max_rel_error = std::max(report.max_rel_error, worst);
      }
    }
  }
  return report;
}

}  // namespace metamec
