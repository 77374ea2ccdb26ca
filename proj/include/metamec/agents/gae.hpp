#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metamec/errors.hpp"

namespace metamec {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> targets;  // A_t + V(s_t), the critic's regression target
};

/// Generalized advantage estimation for one value head.
///
///   delta_t = r_t + gamma * V(s_{t+1}) - V(s_t)
///   A_t     = delta_t + gamma * lambda * A_{t+1}
///
/// V(s_{t+1}) is values[t+1] inside the rollout, `bootstrap_value` after the
/// last step, and 0 whenever step t is terminal. The recursion restarts at
/// every terminal step.
inline AdvantageEstimate generalized_advantages(std::span<const double> values, std::span<const double> rewards,
                                                const std::vector<bool>& terminal, double bootstrap_value,
                                                double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || terminal.size() != n)
    throw ShapeError("compute_advantages: values, rewards and terminal flags must have equal length");
  AdvantageEstimate out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = terminal[t] ? 0.0 : (t + 1 < n ? values[t + 1] : bootstrap_value);
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = terminal[t] ? delta : delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.targets[t] = running + values[t];
  }
  return out;
}

}  // namespace metamec
