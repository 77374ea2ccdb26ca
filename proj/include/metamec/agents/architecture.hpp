#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "metamec/environment.hpp"
#include "metamec/errors.hpp"

namespace metamec {

enum class Algorithm { traditional, user_centered, task_centered, uut, random };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::traditional: return "traditional";
    case Algorithm::user_centered: return "user_centered";
    case Algorithm::task_centered: return "task_centered";
    case Algorithm::uut: return "uut";
    case Algorithm::random: return "random";
  }
  return "?";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  for (Algorithm a : {Algorithm::traditional, Algorithm::user_centered, Algorithm::task_centered, Algorithm::uut,
                      Algorithm::random})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm \"" + std::string(s) + "\"");
}

struct AgentConfig {
  Algorithm algorithm = Algorithm::user_centered;
  std::vector<std::size_t> hidden{128, 128};
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.03;
  double value_coef = 0.5;
  double global_mix = 0.5;  // lambda_g
  bool clipped_surrogate = false;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  std::size_t update_epochs = 1;
  std::size_t rollout_length = 64;
  double max_grad_norm = 5.0;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma violates 0 ≤ γ ≤ 1");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("agent.gae_lambda violates 0 ≤ λ ≤ 1");
    if (!(global_mix >= 0.0)) throw ConfigError("agent.global_mix violates λ_g ≥ 0");
    if (clipped_surrogate && !(clip_epsilon > 0.0 && clip_epsilon < 1.0))
      throw ConfigError("agent.clip_epsilon violates ε_clip in (0,1)");
    if (!(learning_rate > 0.0)) throw ConfigError("agent.learning_rate must be positive");
    if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw ConfigError("agent: loss coefficients must be ≥ 0");
    if (update_epochs < 1) throw ConfigError("agent.update_epochs must be ≥ 1");
    if (rollout_length < 1) throw ConfigError("agent.rollout_length must be ≥ 1");
    if (!(max_grad_norm > 0.0)) throw ConfigError("agent.max_grad_norm must be positive");
    for (std::size_t h : hidden)
      if (h == 0) throw ConfigError("agent.hidden sizes must be positive");
  }

  bool operator==(const AgentConfig&) const = default;
};

/// One categorical decision emitted by an actor tail.
struct HeadSpec {
  std::size_t task = 0;
  std::size_t entity = 0;
  std::size_t choices = 1;
  std::size_t value_head = 0;  // critic head whose advantage weights this tail
};

struct ActorSpec {
  std::vector<std::size_t> input_tasks;  // task states concatenated as input
  std::vector<HeadSpec> heads;           // output layer segments, in order

  std::size_t output_size() const {
    std::size_t n = 0;
    for (const auto& h : heads) n += h.choices;
    return n;
  }
};

/// Actor/critic wiring for one algorithm on one task layout.
///
///   traditional    1 actor over all states, one tail per (task, entity), scalar critic
///   user_centered  1 actor, tails for entity i read critic head V_i (N heads)
///   task_centered  one actor per task, actor k reads V_k; K heads + global V_g
///   uut            one actor per task with a tail per entity; tail (k, i) reads
///                  V_{i,k} stored at index k*N + i; N*K heads + global V_g
///   random         no networks
struct Architecture {
  Algorithm algorithm = Algorithm::traditional;
  TaskLayout layout;
  std::vector<ActorSpec> actors;
  std::size_t value_heads = 0;
  bool global_head = false;

  /// The random baseline still reports the summed scalar reward.
  std::size_t reward_length() const {
    return algorithm == Algorithm::random ? 1 : value_heads + (global_head ? 1 : 0);
  }

  static Architecture build(Algorithm algorithm, const TaskLayout& layout) {
    const std::size_t n = layout.entities;
    const std::size_t k_tasks = layout.tasks();
    if (n < 1 || k_tasks < 1) throw ConfigError("architecture: need at least one entity and one task");
    if (layout.action_sizes.size() != k_tasks) throw ConfigError("architecture: action sizes do not match tasks");
    for (const auto& per_task : layout.action_sizes)
      if (per_task.size() != n) throw ConfigError("architecture: every task needs one action size per entity");

    Architecture a;
    a.algorithm = algorithm;
    a.layout = layout;
    std::vector<std::size_t> all_tasks(k_tasks);
    for (std::size_t k = 0; k < k_tasks; ++k) all_tasks[k] = k;

    switch (algorithm) {
      case Algorithm::traditional:
      case Algorithm::user_centered: {
        ActorSpec actor{all_tasks, {}};
        for (std::size_t k = 0; k < k_tasks; ++k)
          for (std::size_t i = 0; i < n; ++i)
            actor.heads.push_back({k, i, layout.action_sizes[k][i], algorithm == Algorithm::traditional ? 0 : i});
        a.actors.push_back(std::move(actor));
        a.value_heads = algorithm == Algorithm::traditional ? 1 : n;
        break;
      }
      case Algorithm::task_centered:
      case Algorithm::uut: {
        for (std::size_t k = 0; k < k_tasks; ++k) {
          ActorSpec actor{{k}, {}};
          for (std::size_t i = 0; i < n; ++i)
            actor.heads.push_back({k, i, layout.action_sizes[k][i], algorithm == Algorithm::uut ? k * n + i : k});
          a.actors.push_back(std::move(actor));
        }
        a.value_heads = algorithm == Algorithm::uut ? n * k_tasks : k_tasks;
        a.global_head = true;
        break;
      }
      case Algorithm::random:
        break;
    }
    return a;
  }

  /// Builds this architecture's reward vector from per-entity, per-task
  /// rewards (and the global reward when a global head exists).
  std::vector<double> reward_vector(const std::vector<std::vector<double>>& entity_task, double global) const {
    const std::size_t n = layout.entities;
    const std::size_t k_tasks = layout.tasks();
    if (entity_task.size() != n) throw ShapeError("reward: expected one reward row per entity");
    for (const auto& row : entity_task)
      if (row.size() != k_tasks) throw ShapeError("reward: expected one reward per task");
    std::vector<double> r;
    switch (algorithm) {
      case Algorithm::traditional:
      case Algorithm::random: {
        double s = 0.0;
        for (std::size_t k = 0; k < k_tasks; ++k)
          for (std::size_t i = 0; i < n; ++i) s += entity_task[i][k];
        r.push_back(s);
        break;
      }
      case Algorithm::user_centered:
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t k = 0; k < k_tasks; ++k) s += entity_task[i][k];
          r.push_back(s);
        }
        break;
      case Algorithm::task_centered:
        for (std::size_t k = 0; k < k_tasks; ++k) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += entity_task[i][k];
          r.push_back(s);
        }
        r.push_back(global);
        break;
      case Algorithm::uut:
        for (std::size_t k = 0; k < k_tasks; ++k)
          for (std::size_t i = 0; i < n; ++i) r.push_back(entity_task[i][k]);
        r.push_back(global);
        break;
    }
    return r;
  }
};

}  // namespace metamec
