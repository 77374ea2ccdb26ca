#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metamec/adam.hpp"
#include "metamec/agents/architecture.hpp"
#include "metamec/agents/gae.hpp"
#include "metamec/distributions.hpp"
#include "metamec/environment.hpp"
#include "metamec/errors.hpp"
#include "metamec/mlp.hpp"
#include "metamec/rng.hpp"

namespace metamec {

/// Critic head values for one state: value heads first, then V_g when the
/// architecture has a global head.
struct CriticOutputs {
  std::vector<double> values;
};

struct ActorDecision {
  JointAction actions;                             // [task][entity], for the environment
  std::vector<std::vector<std::size_t>> choices;   // [actor][head]
  std::vector<std::vector<double>> log_probs;      // [actor][head]

  double joint_log_prob() const {
    double s = 0.0;
    for (const auto& a : log_probs)
      for (double lp : a) s += lp;
    return s;
  }
};

struct Transition {
  Observation state;
  std::vector<std::vector<std::size_t>> choices;  // [actor][head]
  std::vector<std::vector<double>> log_probs;     // [actor][head], behaviour policy
  std::vector<double> rewards;                    // length = Architecture::reward_length()
  bool terminal = false;
};

struct Rollout {
  std::vector<Transition> steps;
  /// State following the last step; required when that step is not terminal.
  std::optional<Observation> bootstrap;
};

struct AgentParams {
  std::vector<MlpParams> actors;
  MlpParams critic;
  std::optional<MlpParams> global_critic;

  /// actors..., critic, [global critic]
  std::vector<MlpParams> flatten() const {
    std::vector<MlpParams> out = actors;
    out.push_back(critic);
    if (global_critic) out.push_back(*global_critic);
    return out;
  }

  static AgentParams unflatten(const std::vector<MlpParams>& nets, std::size_t actor_count, bool global) {
    if (nets.size() != actor_count + 1 + (global ? 1 : 0)) throw ShapeError("agent params: wrong network count");
    AgentParams p;
    p.actors.assign(nets.begin(), nets.begin() + static_cast<std::ptrdiff_t>(actor_count));
    p.critic = nets[actor_count];
    if (global) p.global_critic = nets[actor_count + 1];
    return p;
  }

  bool operator==(const AgentParams&) const = default;
};

/// Advantages and critic targets for every head of one rollout.
struct PreparedBatch {
  const Rollout* rollout = nullptr;
  std::vector<AdvantageEstimate> heads;
  std::optional<AdvantageEstimate> global;
};

struct UpdateStats {
  std::vector<double> actor_losses;     // per value head, L_i
  std::vector<double> critic_losses;    // per value head
  std::vector<double> mean_advantages;  // per value head, mean A_i
  double global_critic_loss = 0.0;
  double global_mean_advantage = 0.0;
  double entropy = 0.0;                 // mean over steps of summed head entropies
  double actor_loss = 0.0;              // total actor objective incl. entropy term
  double critic_loss = 0.0;             // total critic objective incl. global head
};

/// Policy/value networks for any of the four learning architectures plus the
/// random baseline, with the shared advantage actor-critic update.
class Agent {
 public:
  Agent(AgentConfig cfg, const TaskLayout& layout, const RngStream& init_stream)
      : cfg_(std::move(cfg)), arch_(Architecture::build(cfg_.algorithm, layout)) {
    cfg_.validate();
    if (cfg_.algorithm == Algorithm::random) return;
    for (std::size_t a = 0; a < arch_.actors.size(); ++a) {
      RngStream rng = init_stream.derive("actor/" + std::to_string(a));
      params_.actors.push_back(make_mlp(layer_sizes(actor_input_size(a), arch_.actors[a].output_size()),
                                        HiddenActivation::tanh, OutputActivation::linear, rng));
    }
    RngStream critic_rng = init_stream.derive("critic");
    params_.critic = make_mlp(layer_sizes(layout.total_state_dim(), arch_.value_heads), HiddenActivation::tanh,
                              OutputActivation::linear, critic_rng);
    if (arch_.global_head) {
      RngStream g = init_stream.derive("critic/global");
      params_.global_critic =
          make_mlp(layer_sizes(layout.total_state_dim(), 1), HiddenActivation::tanh, OutputActivation::linear, g);
    }
    reset_optimizers();
  }

  const AgentConfig& config() const { return cfg_; }
  const Architecture& architecture() const { return arch_; }
  const AgentParams& params() const { return params_; }

  /// Replaces the parameters (shapes must match) and resets optimizer state.
  void set_params(AgentParams p) {
    check_params(p);
    params_ = std::move(p);
    reset_optimizers();
  }

  bool learns() const { return cfg_.algorithm != Algorithm::random; }

  Vec actor_input(std::size_t actor, const Observation& obs) const {
    const auto& spec = arch_.actors[actor];
    if (obs.task_states.size() != arch_.layout.tasks()) throw ShapeError("observation: wrong number of task states");
    Vec x;
    for (std::size_t k : spec.input_tasks) x.insert(x.end(), obs.task_states[k].begin(), obs.task_states[k].end());
    return x;
  }

  /// Samples (or, when `greedy`, takes the argmax of) every actor tail. The
  /// random baseline draws uniformly in both modes. One uniform is consumed
  /// per decision, in actor then tail order.
  ActorDecision act(const Observation& obs, RngStream& rng, bool greedy = false) const {
    return act_with(params_, obs, rng, greedy);
  }

  ActorDecision act_with(const AgentParams& p, const Observation& obs, RngStream& rng, bool greedy) const {
    const auto& layout = arch_.layout;
    ActorDecision d;
    d.actions.resize(layout.tasks());
    for (std::size_t k = 0; k < layout.tasks(); ++k) d.actions[k].assign(layout.entities, 0);

    if (cfg_.algorithm == Algorithm::random) {
      d.choices.emplace_back();
      d.log_probs.emplace_back();
      for (std::size_t k = 0; k < layout.tasks(); ++k) {
        for (std::size_t i = 0; i < layout.entities; ++i) {
          const std::size_t n = layout.action_sizes[k][i];
          std::vector<double> probs(n, 1.0 / static_cast<double>(n));
          const auto draw = sample_categorical(probs, rng);
          d.actions[k][i] = draw.index;
          d.choices.back().push_back(draw.index);
          d.log_probs.back().push_back(draw.log_prob);
        }
      }
      return d;
    }

    for (std::size_t a = 0; a < arch_.actors.size(); ++a) {
      const auto& spec = arch_.actors[a];
      const Vec logits = mlp_forward(p.actors[a], actor_input(a, obs));
      d.choices.emplace_back();
      d.log_probs.emplace_back();
      std::size_t offset = 0;
      for (const auto& head : spec.heads) {
        std::span<const double> seg(logits.data() + offset, head.choices);
        const auto logp = log_softmax(seg);
        std::size_t choice = 0;
        if (greedy) {
          choice = argmax(seg);
        } else {
          const auto probs = softmax(seg);
          choice = sample_categorical(probs, rng).index;
        }
        d.actions[head.task][head.entity] = choice;
        d.choices.back().push_back(choice);
        d.log_probs.back().push_back(logp[choice]);
        offset += head.choices;
      }
    }
    return d;
  }

  /// Per-tail action distributions: [actor][head] -> probabilities.
  std::vector<std::vector<std::vector<double>>> policy(const Observation& obs) const {
    std::vector<std::vector<std::vector<double>>> out;
    for (std::size_t a = 0; a < arch_.actors.size(); ++a) {
      const Vec logits = mlp_forward(params_.actors[a], actor_input(a, obs));
      out.emplace_back();
      std::size_t offset = 0;
      for (const auto& head : arch_.actors[a].heads) {
        out.back().push_back(softmax(std::span<const double>(logits.data() + offset, head.choices)));
        offset += head.choices;
      }
    }
    return out;
  }

  CriticOutputs value(const Observation& obs) const { return value_with(params_, obs); }

  CriticOutputs value_with(const AgentParams& p, const Observation& obs) const {
    if (cfg_.algorithm == Algorithm::random) return {};
    const Vec x = obs.concatenated();
    CriticOutputs out{mlp_forward(p.critic, x)};
    if (p.global_critic) out.values.push_back(mlp_forward(*p.global_critic, x)[0]);
    return out;
  }

  /// Runs GAE per head with the current critic.
  PreparedBatch prepare(const Rollout& rollout) const {
    if (rollout.steps.empty()) throw InvalidArgument("update: empty rollout");
    const std::size_t heads = arch_.reward_length();
    const std::size_t n = rollout.steps.size();
    for (const auto& tr : rollout.steps)
      if (tr.rewards.size() != heads)
        throw ConfigError("reward vector has " + std::to_string(tr.rewards.size()) + " entries; " +
                          std::string(to_string(cfg_.algorithm)) + " expects " + std::to_string(heads));
    if (!rollout.steps.back().terminal && !rollout.bootstrap)
      throw InvalidArgument("update: non-terminal rollout needs a bootstrap state");

    std::vector<std::vector<double>> values(heads, std::vector<double>(n));
    std::vector<std::vector<double>> rewards(heads, std::vector<double>(n));
    std::vector<bool> terminal(n);
    for (std::size_t t = 0; t < n; ++t) {
      const auto v = value(rollout.steps[t].state).values;
      for (std::size_t h = 0; h < heads; ++h) {
        values[h][t] = v[h];
        rewards[h][t] = rollout.steps[t].rewards[h];
      }
      terminal[t] = rollout.steps[t].terminal;
    }
    std::vector<double> bootstrap(heads, 0.0);
    if (!rollout.steps.back().terminal) bootstrap = value(*rollout.bootstrap).values;

    PreparedBatch b;
    b.rollout = &rollout;
    for (std::size_t h = 0; h < arch_.value_heads; ++h)
      b.heads.push_back(
          generalized_advantages(values[h], rewards[h], terminal, bootstrap[h], cfg_.gamma, cfg_.gae_lambda));
    if (arch_.global_head) {
      const std::size_t g = arch_.value_heads;
      b.global = generalized_advantages(values[g], rewards[g], terminal, bootstrap[g], cfg_.gamma, cfg_.gae_lambda);
    }
    return b;
  }

  /// Total training loss at parameters `p` with the batch's advantages,
  /// targets and behaviour log-probabilities held fixed. When `grads` is
  /// non-null (sized like p.flatten()) the analytic gradient is accumulated.
  double loss(const AgentParams& p, const PreparedBatch& batch, std::vector<GradBuffer>* grads,
              UpdateStats* stats = nullptr) const {
    const Rollout& rollout = *batch.rollout;
    const std::size_t n = rollout.steps.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const std::size_t actor_count = arch_.actors.size();
    const bool use_global = arch_.global_head && cfg_.global_mix != 0.0;

    UpdateStats local;
    local.actor_losses.assign(arch_.value_heads, 0.0);
    local.critic_losses.assign(arch_.value_heads, 0.0);
    local.mean_advantages.assign(arch_.value_heads, 0.0);
    for (std::size_t h = 0; h < arch_.value_heads; ++h) {
      double s = 0.0;
      for (double a : batch.heads[h].advantages) s += a;
      local.mean_advantages[h] = s * inv_n;
    }
    if (batch.global) {
      double s = 0.0;
      for (double a : batch.global->advantages) s += a;
      local.global_mean_advantage = s * inv_n;
    }

    double entropy_total = 0.0;
    MlpCache cache;
    for (std::size_t a = 0; a < actor_count; ++a) {
      const auto& spec = arch_.actors[a];
      for (std::size_t t = 0; t < n; ++t) {
        const Transition& tr = rollout.steps[t];
        const Vec logits = mlp_forward(p.actors[a], actor_input(a, tr.state), grads ? &cache : nullptr);
        Vec upstream(logits.size(), 0.0);
        std::size_t offset = 0;
        for (std::size_t hi = 0; hi < spec.heads.size(); ++hi) {
          const auto& head = spec.heads[hi];
          std::span<const double> seg(logits.data() + offset, head.choices);
          const auto logp = log_softmax(seg);
          std::vector<double> prob(head.choices);
          for (std::size_t j = 0; j < head.choices; ++j) prob[j] = std::exp(logp[j]);
          const std::size_t taken = tr.choices[a][hi];

          double w = batch.heads[head.value_head].advantages[t];
          if (use_global) w += cfg_.global_mix * batch.global->advantages[t];

          // Policy term: -w log pi(a), or the clipped surrogate -min(rho w, clip(rho) w).
          double policy_loss = 0.0;
          double coeff = 0.0;  // d policy_loss / d log pi(a)
          if (cfg_.clipped_surrogate) {
            const double rho = std::exp(logp[taken] - tr.log_probs[a][hi]);
            const double clipped = std::clamp(rho, 1.0 - cfg_.clip_epsilon, 1.0 + cfg_.clip_epsilon);
            const double unclipped_obj = rho * w;
            const double clipped_obj = clipped * w;
            if (unclipped_obj <= clipped_obj) {
              policy_loss = -unclipped_obj;
              coeff = -w * rho;
            } else {
              policy_loss = -clipped_obj;
            }
          } else {
            policy_loss = -w * logp[taken];
            coeff = -w;
          }
          const double entropy = categorical_entropy(prob, logp);
          local.actor_losses[head.value_head] += policy_loss * inv_n;
          local.actor_loss += (policy_loss - cfg_.entropy_coef * entropy) * inv_n;
          entropy_total += entropy;

          if (grads) {
            for (std::size_t j = 0; j < head.choices; ++j) {
              const double indicator = j == taken ? 1.0 : 0.0;
              const double d_policy = coeff * (indicator - prob[j]);
              const double d_entropy = cfg_.entropy_coef * prob[j] * (logp[j] + entropy);
              upstream[offset + j] = (d_policy + d_entropy) * inv_n;
            }
          }
          offset += head.choices;
        }
        if (grads) mlp_backward_accumulate(p.actors[a], cache, upstream, (*grads)[a]);
      }
    }
    local.entropy = entropy_total * inv_n;

    for (std::size_t t = 0; t < n; ++t) {
      const Transition& tr = rollout.steps[t];
      const Vec x = tr.state.concatenated();
      const Vec v = mlp_forward(p.critic, x, grads ? &cache : nullptr);
      Vec upstream(v.size(), 0.0);
      for (std::size_t h = 0; h < arch_.value_heads; ++h) {
        const double err = v[h] - batch.heads[h].targets[t];
        local.critic_losses[h] += cfg_.value_coef * err * err * inv_n;
        upstream[h] = 2.0 * cfg_.value_coef * err * inv_n;
      }
      if (grads) mlp_backward_accumulate(p.critic, cache, upstream, (*grads)[actor_count]);

      if (p.global_critic) {
        const Vec g = mlp_forward(*p.global_critic, x, grads ? &cache : nullptr);
        const double err = g[0] - batch.global->targets[t];
        local.global_critic_loss += cfg_.value_coef * err * err * inv_n;
        const double up[] = {2.0 * cfg_.value_coef * err * inv_n};
        if (grads) mlp_backward_accumulate(*p.global_critic, cache, up, (*grads)[actor_count + 1]);
      }
    }
    for (double c : local.critic_losses) local.critic_loss += c;
    local.critic_loss += local.global_critic_loss;

    const double total = local.actor_loss + local.critic_loss;
    if (!std::isfinite(total)) throw DivergenceError("non-finite training loss");
    if (stats) *stats = std::move(local);
    return total;
  }

  /// One advantage actor-critic update: GAE with the pre-update critic, then
  /// `update_epochs` passes of (clip to max_grad_norm, Adam) on every network.
  UpdateStats update(const Rollout& rollout) {
    if (!learns()) return {};
    const PreparedBatch batch = prepare(rollout);
    const std::size_t epochs = cfg_.update_epochs;
    UpdateStats first;
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<GradBuffer> grads;
      for (const auto& net : params_.actors) grads.emplace_back(net);
      grads.emplace_back(params_.critic);
      if (params_.global_critic) grads.emplace_back(*params_.global_critic);
      loss(params_, batch, &grads, e == 0 ? &first : nullptr);

      for (std::size_t a = 0; a < params_.actors.size(); ++a) {
        clip_global_norm(grads[a], cfg_.max_grad_norm);
        adam_step(params_.actors[a], grads[a], actor_opt_[a]);
      }
      const std::size_t c = params_.actors.size();
      clip_global_norm(grads[c], cfg_.max_grad_norm);
      adam_step(params_.critic, grads[c], critic_opt_);
      if (params_.global_critic) {
        clip_global_norm(grads[c + 1], cfg_.max_grad_norm);
        adam_step(*params_.global_critic, grads[c + 1], global_opt_);
      }
    }
    return first;
  }

 private:
  std::vector<std::size_t> layer_sizes(std::size_t in, std::size_t out) const {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    s.push_back(out);
    return s;
  }

  std::size_t actor_input_size(std::size_t a) const {
    std::size_t n = 0;
    for (std::size_t k : arch_.actors[a].input_tasks) n += arch_.layout.task_state_dims[k];
    return n;
  }

  void check_params(const AgentParams& p) const {
    auto same_shape = [](const MlpParams& x, const MlpParams& y) {
      return x.layer_sizes == y.layer_sizes && x.hidden_activation == y.hidden_activation &&
             x.output_activation == y.output_activation;
    };
    bool ok = p.actors.size() == params_.actors.size() && p.global_critic.has_value() == params_.global_critic.has_value();
    for (std::size_t a = 0; ok && a < p.actors.size(); ++a) ok = same_shape(p.actors[a], params_.actors[a]);
    if (ok && learns()) ok = same_shape(p.critic, params_.critic);
    if (ok && p.global_critic) ok = same_shape(*p.global_critic, *params_.global_critic);
    if (!ok) throw ConfigError("agent params do not match the architecture for this environment");
  }

  void reset_optimizers() {
    actor_opt_.clear();
    for (const auto& a : params_.actors) actor_opt_.emplace_back(a, cfg_.learning_rate);
    if (!learns()) return;
    critic_opt_ = AdamState(params_.critic, cfg_.learning_rate);
    if (params_.global_critic) global_opt_ = AdamState(*params_.global_critic, cfg_.learning_rate);
  }

  AgentConfig cfg_;
  Architecture arch_;
  AgentParams params_;
  std::vector<AdamState> actor_opt_;
  AdamState critic_opt_;
  AdamState global_opt_;
};

}  // namespace metamec
