#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metamec/agents/agent.hpp"

namespace metamec {

namespace detail {

inline void require_algorithm(const Agent& agent, Algorithm expected, const char* op) {
  if (agent.config().algorithm != expected)
    throw ConfigError(std::string(op) + ": agent runs " + std::string(to_string(agent.config().algorithm)));
}

inline void require_state_shape(const Agent& agent, const Observation& obs, const char* op) {
  const auto& layout = agent.architecture().layout;
  if (obs.task_states.size() != layout.tasks())
    throw ConfigError(std::string(op) + ": expected " + std::to_string(layout.tasks()) + " task states");
  for (std::size_t k = 0; k < layout.tasks(); ++k)
    if (obs.task_states[k].size() != layout.task_state_dims[k])
      throw ShapeError(std::string(op) + ": task " + std::to_string(k) + " state has wrong dimension");
}

inline void require_reward_length(const Agent& agent, const Rollout& rollout, const char* op) {
  const std::size_t expected = agent.architecture().reward_length();
  for (const auto& tr : rollout.steps)
    if (tr.rewards.size() != expected)
      throw ConfigError(std::string(op) + ": reward vector length " + std::to_string(tr.rewards.size()) +
                        " != " + std::to_string(expected));
}

}  // namespace detail

// Action selection ---------------------------------------------------------

/// Shared-trunk actor, one categorical tail per decision slot.
inline ActorDecision act_traditional(const Agent& agent, const Observation& obs, RngStream& rng) {
  detail::require_algorithm(agent, Algorithm::traditional, "act_traditional");
  detail::require_state_shape(agent, obs, "act_traditional");
  return agent.act(obs, rng);
}

/// Shared trunk over the concatenated user states, one tail per user.
inline ActorDecision act_user_centered(const Agent& agent, const Observation& obs, RngStream& rng) {
  detail::require_algorithm(agent, Algorithm::user_centered, "act_user_centered");
  detail::require_state_shape(agent, obs, "act_user_centered");
  return agent.act(obs, rng);
}

/// One actor per task; actor k only sees task k's state.
inline ActorDecision act_task_centered(const Agent& agent, const Observation& obs, RngStream& rng) {
  detail::require_algorithm(agent, Algorithm::task_centered, "act_task_centered");
  detail::require_state_shape(agent, obs, "act_task_centered");
  return agent.act(obs, rng);
}

inline ActorDecision act_uut(const Agent& agent, const Observation& obs, RngStream& rng) {
  detail::require_algorithm(agent, Algorithm::uut, "act_uut");
  detail::require_state_shape(agent, obs, "act_uut");
  return agent.act(obs, rng);
}

/// Uniform action per slot, one draw per slot.
inline std::vector<std::size_t> act_random(const std::vector<std::size_t>& action_space_sizes, RngStream& rng) {
  std::vector<std::size_t> out;
  out.reserve(action_space_sizes.size());
  for (std::size_t n : action_space_sizes) {
    if (n < 1) throw InvalidArgument("act_random: action space sizes must be >= 1");
    std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    out.push_back(sample_categorical(probs, rng).index);
  }
  return out;
}

// Critic evaluation ---------------------------------------------------------

inline CriticOutputs value_traditional(const Agent& agent, const Observation& obs) {
  detail::require_algorithm(agent, Algorithm::traditional, "value_traditional");
  detail::require_state_shape(agent, obs, "value_traditional");
  return agent.value(obs);
}

/// V_i for every user.
inline CriticOutputs value_user_centered(const Agent& agent, const Observation& obs) {
  detail::require_algorithm(agent, Algorithm::user_centered, "value_user_centered");
  detail::require_state_shape(agent, obs, "value_user_centered");
  return agent.value(obs);
}

/// V_1..V_K followed by V_g.
inline CriticOutputs value_task_centered(const Agent& agent, const Observation& obs) {
  detail::require_algorithm(agent, Algorithm::task_centered, "value_task_centered");
  detail::require_state_shape(agent, obs, "value_task_centered");
  return agent.value(obs);
}

/// V_{i,k} at index k*N + i, followed by V_g.
inline CriticOutputs value_uut(const Agent& agent, const Observation& obs) {
  detail::require_algorithm(agent, Algorithm::uut, "value_uut");
  detail::require_state_shape(agent, obs, "value_uut");
  return agent.value(obs);
}

// Advantage estimation --------------------------------------------------------

/// GAE on one head of a sequence of critic outputs. `rewards[t]` is the
/// reward vector of step t; `bootstrap` is the critic output after the last
/// step (ignored when that step is terminal).
inline AdvantageEstimate compute_advantages(const std::vector<CriticOutputs>& values,
                                            const std::vector<std::vector<double>>& rewards,
                                            const std::vector<bool>& terminal, const CriticOutputs& bootstrap,
                                            double gamma, double lambda, std::size_t head) {
  if (values.size() != rewards.size()) throw ShapeError("compute_advantages: values and rewards differ in length");
  std::vector<double> v, r;
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (head >= values[t].values.size() || head >= rewards[t].size())
      throw ShapeError("compute_advantages: head index out of range");
    v.push_back(values[t].values[head]);
    r.push_back(rewards[t][head]);
  }
  double boot = 0.0;
  if (!terminal.empty() && !terminal.back()) {
    if (head >= bootstrap.values.size()) throw ShapeError("compute_advantages: bootstrap missing head");
    boot = bootstrap.values[head];
  }
  return generalized_advantages(v, r, terminal, boot, gamma, lambda);
}

// Updates -------------------------------------------------------------------

/// Scalar pooled reward, single critic.
inline UpdateStats update_traditional(Agent& agent, const Rollout& rollout) {
  detail::require_algorithm(agent, Algorithm::traditional, "update_traditional");
  detail::require_reward_length(agent, rollout, "update_traditional");
  return agent.update(rollout);
}

/// Per-user rewards r_i drive per-user advantages A_i on tail i.
inline UpdateStats update_user_centered(Agent& agent, const Rollout& rollout) {
  detail::require_algorithm(agent, Algorithm::user_centered, "update_user_centered");
  detail::require_reward_length(agent, rollout, "update_user_centered");
  return agent.update(rollout);
}

/// Actor k weighted by A_k + lambda_g * A_g; critic trained on K+1 heads.
inline UpdateStats update_task_centered(Agent& agent, const Rollout& rollout) {
  detail::require_algorithm(agent, Algorithm::task_centered, "update_task_centered");
  detail::require_reward_length(agent, rollout, "update_task_centered");
  return agent.update(rollout);
}

/// Tail i of actor k weighted by A_{i,k} + lambda_g * A_g; critic on N*K+1 heads.
inline UpdateStats update_uut(Agent& agent, const Rollout& rollout) {
  detail::require_algorithm(agent, Algorithm::uut, "update_uut");
  detail::require_reward_length(agent, rollout, "update_uut");
  return agent.update(rollout);
}

}  // namespace metamec
