#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "metamec/mlp.hpp"

namespace metamec {

/// Shape of a multi-entity, multi-task decision problem. Entities are users
/// (VR) or vehicles; tasks are the MEC decisions each entity receives.
struct TaskLayout {
  std::size_t entities = 0;
  std::vector<std::size_t> task_state_dims;             // [task]
  std::vector<std::vector<std::size_t>> action_sizes;   // [task][entity]

  std::size_t tasks() const { return task_state_dims.size(); }
  std::size_t total_state_dim() const {
    return std::accumulate(task_state_dims.begin(), task_state_dims.end(), std::size_t{0});
  }
  bool operator==(const TaskLayout&) const = default;
};

/// Per-task observation vectors; the critic (and single-actor architectures)
/// see their concatenation in task order.
struct Observation {
  std::vector<Vec> task_states;

  Vec concatenated() const {
    Vec out;
    for (const auto& s : task_states) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
  bool operator==(const Observation&) const = default;
};

/// actions[task][entity]
using JointAction = std::vector<std::vector<std::size_t>>;

/// Environment-agnostic view of one step, consumed by the trainer.
struct GenericStep {
  Observation next;
  std::vector<std::vector<double>> entity_task_rewards;  // [entity][task]
  double global_reward = 0.0;
  bool terminal = false;
};

using MetricList = std::vector<std::pair<std::string, double>>;

}  // namespace metamec
