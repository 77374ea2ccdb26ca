#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metamec/environment.hpp"
#include "metamec/envcore.hpp"
#include "metamec/errors.hpp"
#include "metamec/rng.hpp"

namespace metamec {

/// One VR user's requirements and device. Payloads (`scene_bits`,
/// `workload`) are given at full metaverse scale and multiplied by the
/// preset's scale factors.
struct VrUserProfile {
  double fps = 60.0;
  double delay_tolerance_ms = 50.0;
  double energy_budget_j = 1.0;  // per frame
  double capability = 4e9;       // cycles/s
  double mean_gain = 1e-10;
  double tx_power = 0.2;         // W
  double scene_bits = 8e6;       // uplink payload per frame
  double workload = 4e8;         // cycles to render one frame

  /// Effective per-frame deadline in ms: the tighter of frame period and tolerance.
  double deadline_ms() const { return std::min(1000.0 / fps, delay_tolerance_ms); }

  bool operator==(const VrUserProfile&) const = default;
};

/// Four heterogeneous users: a tolerant weak headset, a mid-range device
/// whose local render busts its energy budget, a 90 FPS device that cannot
/// afford local rendering, and a 120 FPS (MTP-bound) flagship that can.
inline std::vector<VrUserProfile> default_vr_roster() {
  return {
      {30.0, 100.0, 0.05, 1e9, 1e-10, 0.2, 8e6, 8e8},
      {60.0, 50.0, 0.5, 4e9, 1e-10, 0.2, 8e6, 4e8},
      {90.0, 25.0, 1.0, 8e9, 1e-10, 0.2, 4e6, 4e8},
      {120.0, 20.0, 6.0, 1e10, 1e-10, 0.2, 4e6, 4e8},
  };
}

/// Closed ranges [lo, hi] for sampled rosters.
struct VrSampling {
  std::array<double, 2> fps{30.0, 120.0};
  std::array<double, 2> delay_tolerance_ms{20.0, 100.0};
  std::array<double, 2> energy_budget_j{0.05, 6.0};
  std::array<double, 2> capability{1e9, 1e10};
  std::array<double, 2> mean_gain{5e-11, 2e-10};
  std::array<double, 2> tx_power{0.1, 0.3};
  std::array<double, 2> scene_bits{4e6, 8e6};
  std::array<double, 2> workload{4e8, 8e8};

  bool operator==(const VrSampling&) const = default;
};

enum class VrRewardMode { binary, signed_unit };

struct VrConfig {
  std::string preset = "desk-scale";
  std::size_t n_users = 4;
  std::size_t channels = 2;
  std::size_t episode_length = 64;
  std::vector<VrUserProfile> roster;   // empty: default roster, cycled to n_users
  std::optional<VrSampling> sampling;  // when set, profiles are drawn at reset
  double bandwidth_hz = 20e6;
  double noise_density = 1e-20;
  Fading fading = Fading::rayleigh_block;
  double server_cycles = 1e11;
  double kappa = 1e-27;
  VrRewardMode reward = VrRewardMode::binary;

  void validate() const {
    if (n_users < 1) throw ConfigError("env.vr.n_users must be >= 1");
    if (channels < 1) throw ConfigError("env.vr.channels must be >= 1");
    if (episode_length < 1) throw ConfigError("env.vr.episode_length must be >= 1");
    if (!roster.empty() && sampling) throw ConfigError("env.vr: roster and sampling are mutually exclusive");
    if (!roster.empty() && roster.size() != n_users)
      throw ConfigError("env.vr.roster must list exactly n_users profiles");
    for (const auto& u : roster) {
      if (!(u.fps > 0 && u.delay_tolerance_ms > 0 && u.energy_budget_j > 0 && u.capability > 0 &&
            u.mean_gain > 0 && u.tx_power > 0 && u.scene_bits > 0 && u.workload > 0))
        throw ConfigError("env.vr.roster: every profile field must be positive");
    }
    if (!(bandwidth_hz > 0) || !(noise_density > 0) || !(server_cycles > 0) || !(kappa > 0))
      throw ConfigError("env.vr: physical constants must be positive");
    find_preset(preset);
  }

  bool operator==(const VrConfig&) const = default;
};

/// Per-user state in feature order: fps, delay tolerance, energy budget,
/// capability, current gain, previous-step success.
inline constexpr std::size_t kVrFeaturesPerUser = 6;

struct VrState {
  std::vector<VrUserProfile> profiles;  // payloads already preset-scaled
  std::vector<double> gains;
  std::vector<bool> prev_success;
  std::size_t step = 0;

  /// Network input, concatenated in user order. Profile fields are divided
  /// by fixed reference magnitudes; the gain by the user's own mean gain.
  Vec features() const {
    Vec f;
    f.reserve(profiles.size() * kVrFeaturesPerUser);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const auto& u = profiles[i];
      f.push_back(u.fps / 120.0);
      f.push_back(u.delay_tolerance_ms / 100.0);
      f.push_back(std::log10(u.energy_budget_j));
      f.push_back(u.capability / 1e10);
      f.push_back(gains[i] / u.mean_gain);
      f.push_back(prev_success[i] ? 1.0 : 0.0);
    }
    return f;
  }

  bool operator==(const VrState&) const = default;
};

/// Outcome for one user in one frame slot.
struct VrUserOutcome {
  std::size_t choice = 0;  // 0 = local, k >= 1 = offload on channel k
  bool reachable = true;
  double delay_ms = 0.0;   // +inf when unreachable
  double energy_j = 0.0;
  bool success = false;
};

struct VrStepResult {
  VrState next;
  std::vector<double> rewards;  // per user
  std::vector<VrUserOutcome> info;
  bool terminal = false;
};

namespace detail {

inline VrUserProfile scaled(VrUserProfile u, const EnvPreset& preset) {
  u.scene_bits *= preset.scene_scale;
  u.workload *= preset.workload_scale;
  return u;
}

inline VrUserProfile sample_profile(const VrSampling& s, RngStream& rng) {
  VrUserProfile u;
  u.fps = rng.uniform(s.fps[0], s.fps[1]);
  u.delay_tolerance_ms = rng.uniform(s.delay_tolerance_ms[0], s.delay_tolerance_ms[1]);
  u.energy_budget_j = rng.uniform(s.energy_budget_j[0], s.energy_budget_j[1]);
  u.capability = rng.uniform(s.capability[0], s.capability[1]);
  u.mean_gain = rng.uniform(s.mean_gain[0], s.mean_gain[1]);
  u.tx_power = rng.uniform(s.tx_power[0], s.tx_power[1]);
  u.scene_bits = rng.uniform(s.scene_bits[0], s.scene_bits[1]);
  u.workload = rng.uniform(s.workload[0], s.workload[1]);
  return u;
}

}  // namespace detail

/// Pure step physics: evaluates `action` against `state`'s gains without
/// touching any random stream. `action[i]` is user i's choice in 0..C.
inline std::vector<VrUserOutcome> vr_outcomes(const VrConfig& cfg, const VrState& state,
                                              const std::vector<std::size_t>& action) {
  const std::size_t n = state.profiles.size();
  if (action.size() != n) throw ShapeError("vr_step: expected one action per user");
  for (std::size_t a : action)
    if (a > cfg.channels) throw InvalidArgument("vr_step: channel index out of range");

  const EnvPreset& preset = find_preset(cfg.preset);
  const ChannelModel channel{cfg.bandwidth_hz, cfg.noise_density, cfg.channels, cfg.fading};
  const double rendered_bits = preset.qos.render_rate_bps / preset.qos.target_fps * preset.scene_scale;
  const double downlink_s = rendered_bits / preset.qos.render_rate_bps;

  std::size_t offloaders = 0;
  for (std::size_t a : action) offloaders += a > 0 ? 1 : 0;

  std::vector<VrUserOutcome> out(n);
  for (std::size_t k = 1; k <= cfg.channels; ++k) {
    std::vector<std::size_t> members;
    std::vector<Transmitter> tx;
    for (std::size_t i = 0; i < n; ++i) {
      if (action[i] != k) continue;
      members.push_back(i);
      tx.push_back({state.profiles[i].tx_power, state.gains[i]});
    }
    const auto rates = share_channel(channel, tx);
    for (std::size_t m = 0; m < members.size(); ++m) {
      const std::size_t i = members[m];
      const auto& u = state.profiles[i];
      auto& o = out[i];
      o.choice = k;
      const auto uplink = tx_delay(u.scene_bits, rates[m]);
      if (!uplink) {
        o.reachable = false;
        o.delay_ms = std::numeric_limits<double>::infinity();
        o.energy_j = 0.0;
        continue;
      }
      const double total_s = *uplink + server_compute(u.workload, cfg.server_cycles, offloaders) + downlink_s;
      o.delay_ms = total_s * 1000.0;
      o.energy_j = tx_energy(u.tx_power, *uplink);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = state.profiles[i];
    auto& o = out[i];
    if (action[i] == 0) {
      o.choice = 0;
      const auto cost = local_compute(u.workload, u.capability, cfg.kappa);
      o.delay_ms = cost.delay_s * 1000.0;
      o.energy_j = cost.energy_j;
    }
    o.success = o.reachable && o.delay_ms <= u.deadline_ms() && o.energy_j <= u.energy_budget_j;
  }
  return out;
}

/// Centralized VR offloading controller environment.
class VrEnv {
 public:
  VrEnv(VrConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed, "env/vr"), global_(1) {
    cfg_.validate();
  }

  const VrConfig& config() const { return cfg_; }
  const VrState& state() const { return state_; }

  TaskLayout layout() const {
    TaskLayout l;
    l.entities = cfg_.n_users;
    l.task_state_dims = {cfg_.n_users * kVrFeaturesPerUser + 1};
    l.action_sizes = {std::vector<std::size_t>(cfg_.n_users, cfg_.channels + 1)};
    return l;
  }

  const VrState& reset() {
    const EnvPreset& preset = find_preset(cfg_.preset);
    state_ = VrState{};
    if (cfg_.sampling) {
      for (std::size_t i = 0; i < cfg_.n_users; ++i)
        state_.profiles.push_back(detail::scaled(detail::sample_profile(*cfg_.sampling, rng_), preset));
    } else {
      const auto roster = cfg_.roster.empty() ? default_vr_roster() : cfg_.roster;
      for (std::size_t i = 0; i < cfg_.n_users; ++i)
        state_.profiles.push_back(detail::scaled(roster[i % roster.size()], preset));
    }
    state_.gains.resize(cfg_.n_users);
    redraw_gains();
    state_.prev_success.assign(cfg_.n_users, false);
    state_.step = 0;
    episode_success_ = 0;
    episode_slots_ = 0;
    return state_;
  }

  VrStepResult step(const std::vector<std::size_t>& action) {
    if (state_.profiles.empty()) throw InvalidArgument("vr_step: reset() must be called first");
    VrStepResult r;
    r.info = vr_outcomes(cfg_, state_, action);
    r.rewards.resize(cfg_.n_users);
    for (std::size_t i = 0; i < cfg_.n_users; ++i) {
      const bool ok = r.info[i].success;
      r.rewards[i] = ok ? 1.0 : (cfg_.reward == VrRewardMode::signed_unit ? -1.0 : 0.0);
      state_.prev_success[i] = ok;
      episode_success_ += ok ? 1 : 0;
    }
    episode_slots_ += cfg_.n_users;
    redraw_gains();
    ++state_.step;
    r.terminal = state_.step >= cfg_.episode_length;
    r.next = state_;
    return r;
  }

  // Generic interface used by the trainer.
  /// Per-user features followed by the elapsed fraction of the episode.
  Observation observe() const {
    Vec f = state_.features();
    f.push_back(static_cast<double>(state_.step) / static_cast<double>(cfg_.episode_length));
    return Observation{{std::move(f)}};
  }

  Observation reset_generic() {
    reset();
    return observe();
  }

  GenericStep step_generic(const JointAction& action) {
    if (action.size() != 1) throw ShapeError("vr env has exactly one task");
    auto r = step(action[0]);
    GenericStep g;
    g.entity_task_rewards.resize(cfg_.n_users);
    double task_reward = 0.0;
    for (std::size_t i = 0; i < cfg_.n_users; ++i) {
      g.entity_task_rewards[i] = {r.rewards[i]};
      task_reward += r.rewards[i];
    }
    const double task_rewards[] = {task_reward};
    g.global_reward = global_(task_rewards);
    g.terminal = r.terminal;
    g.next = observe();
    return g;
  }

  /// Success percentage over the episode so far.
  MetricList episode_metrics() const {
    const double rate = episode_slots_ == 0 ? 0.0 : 100.0 * static_cast<double>(episode_success_) /
                                                         static_cast<double>(episode_slots_);
    return {{"success_rate", rate}};
  }

 private:
  void redraw_gains() {
    for (std::size_t i = 0; i < cfg_.n_users; ++i)
      state_.gains[i] = draw_gain(state_.profiles[i].mean_gain, cfg_.fading, rng_);
  }

  VrConfig cfg_;
  RngStream rng_;
  GlobalRewardRule global_;
  VrState state_;
  std::size_t episode_success_ = 0;
  std::size_t episode_slots_ = 0;
};

inline VrState vr_reset(const VrConfig& cfg, std::uint64_t seed) {
  VrEnv env(cfg, seed);
  return env.reset();
}

/// 100 * successes / (users * steps) over per-step reward vectors.
inline double vr_success_rate(const std::vector<std::vector<double>>& episode_rewards) {
  if (episode_rewards.empty()) throw InvalidArgument("vr_success_rate: empty episode");
  double hits = 0.0;
  std::size_t slots = 0;
  for (const auto& step : episode_rewards) {
    for (double r : step) hits += r > 0.0 ? 1.0 : 0.0;
    slots += step.size();
  }
  if (slots == 0) throw InvalidArgument("vr_success_rate: empty episode");
  return 100.0 * hits / static_cast<double>(slots);
}

}  // namespace metamec
