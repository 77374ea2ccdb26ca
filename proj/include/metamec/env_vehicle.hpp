#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "metamec/environment.hpp"
#include "metamec/envcore.hpp"
#include "metamec/errors.hpp"
#include "metamec/rng.hpp"

namespace metamec {

struct LevelEntry {
  double scene_bits;
  double accuracy;
  bool operator==(const LevelEntry&) const = default;
};

/// Uplink transmission levels, strictly increasing in both payload and
/// detection-accuracy proxy.
struct LevelTable {
  std::vector<LevelEntry> levels;

  /// S_l = l * base_bits, a_l = a_max - b * exp(-c * l) for l = 1..count.
  static LevelTable saturating(std::size_t count, double base_bits, double a_max = 0.95, double b = 0.6,
                               double c = 0.9) {
    LevelTable t;
    for (std::size_t l = 1; l <= count; ++l) {
      const double ld = static_cast<double>(l);
      t.levels.push_back({ld * base_bits, a_max - b * std::exp(-c * ld)});
    }
    return t;
  }

  std::size_t size() const { return levels.size(); }

  void validate() const {
    if (levels.empty()) throw ConfigError("env.vehicle.level_table must have at least one level");
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (!(levels[l].scene_bits > 0.0)) throw ConfigError("env.vehicle.level_table: scene_bits must be positive");
      if (!(levels[l].accuracy > 0.0 && levels[l].accuracy <= 1.0))
        throw ConfigError("env.vehicle.level_table: accuracy must lie in (0, 1]");
      if (l > 0 && !(levels[l].scene_bits > levels[l - 1].scene_bits && levels[l].accuracy > levels[l - 1].accuracy))
        throw ConfigError("env.vehicle.level_table must be strictly increasing in scene_bits and accuracy");
    }
  }

  bool operator==(const LevelTable&) const = default;
};

struct VehicleConfig {
  std::string preset = "desk-scale";
  std::size_t m_vehicles = 4;
  std::size_t e_servers = 2;
  std::size_t levels = 4;
  std::size_t episode_length = 64;
  /// Empty: saturating default table with `levels` entries and base payload
  /// `base_level_bits` (full scale, multiplied by the preset scene scale).
  std::vector<LevelEntry> level_table;
  double base_level_bits = 2e4;
  double bandwidth_hz = 10e6;  // per server band
  double noise_density = 1e-20;
  double tx_power = 0.2;
  double near_gain = 5e-11;
  double far_gain = 5e-14;
  Fading fading = Fading::static_gain;
  /// Probability that each server other than a vehicle's home server is
  /// also near it.
  double extra_near_prob = 0.5;
  double server_cycles = 1e11;  // per server
  double detect_workload = 8e9; // full scale, per scene

  LevelTable table() const {
    if (level_table.empty()) {
      const double base = base_level_bits * find_preset(preset).scene_scale;
      return LevelTable::saturating(levels, base);
    }
    return LevelTable{level_table};
  }

  double scaled_workload() const { return detect_workload * find_preset(preset).workload_scale; }

  void validate() const {
    if (m_vehicles < 1 || e_servers < 1 || levels < 1)
      throw ConfigError("env.vehicle: m_vehicles, e_servers and levels must be >= 1");
    if (episode_length < 1) throw ConfigError("env.vehicle.episode_length must be >= 1");
    if (!level_table.empty() && level_table.size() != levels)
      throw ConfigError("env.vehicle.level_table must have exactly `levels` entries");
    if (!(extra_near_prob >= 0.0 && extra_near_prob <= 1.0))
      throw ConfigError("env.vehicle.extra_near_prob must lie in [0, 1]");
    if (!(base_level_bits > 0 && bandwidth_hz > 0 && noise_density > 0 && tx_power > 0 && near_gain > 0 &&
          far_gain > 0 && server_cycles > 0 && detect_workload > 0))
      throw ConfigError("env.vehicle: physical constants must be positive");
    find_preset(preset);
    table().validate();
  }

  bool operator==(const VehicleConfig&) const = default;
};

struct VehicleState {
  std::vector<std::vector<double>> mean_gains;  // [vehicle][server], from position class
  std::vector<std::vector<double>> gains;       // [vehicle][server], current
  std::vector<double> loads;                    // vehicles per server on the last step
  std::vector<double> last_delays_ms;           // per vehicle
  std::size_t step = 0;

  bool operator==(const VehicleState&) const = default;
};

/// Per-task actions: server[j] in 0..E-1, level[j] in 0..L-1 (level index l
/// selects table entry l, i.e. level l+1).
struct VehicleAction {
  std::vector<std::size_t> server;
  std::vector<std::size_t> level;
};

struct VehicleInfo {
  std::vector<double> delay_ms;  // per vehicle
  std::vector<double> accuracy;  // per vehicle
  double mean_delay_ms = 0.0;
  double mean_accuracy = 0.0;
};

struct VehicleStepResult {
  VehicleState next;
  double r_delay = 0.0;
  double r_acc = 0.0;
  double r_global = 0.0;
  std::vector<std::vector<double>> entity_task_rewards;  // [vehicle][task]
  VehicleInfo info;
  bool terminal = false;

  std::vector<double> rewards() const { return {r_delay, r_acc, r_global}; }
};

/// Worst single-vehicle level-L delay (s) at mean gain, over every
/// vehicle/server pairing that can occur. Scales r_delay and caps the delay
/// observations.
inline double vehicle_delay_norm(const VehicleConfig& cfg) {
  const double bits = cfg.table().levels.back().scene_bits;
  const double rate =
      shannon_rate(cfg.bandwidth_hz, cfg.tx_power, std::min(cfg.near_gain, cfg.far_gain), cfg.noise_density);
  return bits / rate + server_compute(cfg.scaled_workload(), cfg.server_cycles, 1);
}

/// Single-vehicle level-L delay (s) to a near server; the unit of delay
/// observations.
inline double vehicle_reference_delay(const VehicleConfig& cfg) {
  const double bits = cfg.table().levels.back().scene_bits;
  const double rate = shannon_rate(cfg.bandwidth_hz, cfg.tx_power, cfg.near_gain, cfg.noise_density);
  return bits / rate + server_compute(cfg.scaled_workload(), cfg.server_cycles, 1);
}

/// Uplink + detection delay per vehicle (s). Unreachable links (zero gain)
/// are charged 10x the normalizing delay.
inline std::vector<double> vehicle_delays(const VehicleConfig& cfg, const LevelTable& table, const VehicleState& state,
                                          const VehicleAction& action, double delay_norm) {
  const std::size_t m = cfg.m_vehicles;
  if (action.server.size() != m || action.level.size() != m)
    throw ShapeError("veh_step: expected one server and one level per vehicle");
  for (std::size_t j = 0; j < m; ++j) {
    if (action.server[j] >= cfg.e_servers) throw InvalidArgument("veh_step: server index out of range");
    if (action.level[j] >= table.size()) throw InvalidArgument("veh_step: level index out of range");
  }
  const ChannelModel band{cfg.bandwidth_hz, cfg.noise_density, 1, cfg.fading};
  const double workload = cfg.scaled_workload();
  std::vector<double> delay(m, 0.0);
  for (std::size_t s = 0; s < cfg.e_servers; ++s) {
    std::vector<std::size_t> members;
    std::vector<Transmitter> tx;
    for (std::size_t j = 0; j < m; ++j) {
      if (action.server[j] != s) continue;
      members.push_back(j);
      tx.push_back({cfg.tx_power, state.gains[j][s]});
    }
    if (members.empty()) continue;
    const auto rates = share_channel(band, tx);
    const double compute = server_compute(workload, cfg.server_cycles, members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::size_t j = members[i];
      const auto up = tx_delay(table.levels[action.level[j]].scene_bits, rates[i]);
      delay[j] = up ? *up + compute : 10.0 * delay_norm;
    }
  }
  return delay;
}

/// Vehicular digital-twin uplink environment with two tasks: server
/// allocation (task 0) and transmission level (task 1).
class VehicleEnv {
 public:
  VehicleEnv(VehicleConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), rng_(seed, "env/vehicle"), global_(2) {
    cfg_.validate();
    table_ = cfg_.table();
    delay_norm_ = vehicle_delay_norm(cfg_);
    delay_ref_ = vehicle_reference_delay(cfg_);
  }

  const VehicleConfig& config() const { return cfg_; }
  const VehicleState& state() const { return state_; }
  const LevelTable& table() const { return table_; }
  double delay_norm() const { return delay_norm_; }

  TaskLayout layout() const {
    const std::size_t m = cfg_.m_vehicles, e = cfg_.e_servers;
    TaskLayout l;
    l.entities = m;
    l.task_state_dims = {m * e + e + 1, m * e + m + 1};
    l.action_sizes = {std::vector<std::size_t>(m, e), std::vector<std::size_t>(m, table_.size())};
    return l;
  }

  /// Each vehicle is near one uniformly drawn home server; every other server
  /// is near with probability extra_near_prob and far otherwise.
  const VehicleState& reset() {
    const std::size_t m = cfg_.m_vehicles, e = cfg_.e_servers;
    state_ = VehicleState{};
    state_.mean_gains.assign(m, std::vector<double>(e, cfg_.far_gain));
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t home = rng_.below(e);
      for (std::size_t s = 0; s < e; ++s)
        if (s == home || rng_.uniform() < cfg_.extra_near_prob) state_.mean_gains[j][s] = cfg_.near_gain;
    }
    state_.gains = state_.mean_gains;
    redraw_gains();
    state_.loads.assign(e, 0.0);
    state_.last_delays_ms.assign(m, 0.0);
    state_.step = 0;
    episode_delay_sum_ = 0.0;
    episode_acc_sum_ = 0.0;
    episode_samples_ = 0;
    return state_;
  }

  VehicleStepResult step(const VehicleAction& action) {
    if (state_.gains.empty()) throw InvalidArgument("veh_step: reset() must be called first");
    const std::size_t m = cfg_.m_vehicles;
    const auto delays = vehicle_delays(cfg_, table_, state_, action, delay_norm_);

    VehicleStepResult r;
    r.info.delay_ms.resize(m);
    r.info.accuracy.resize(m);
    r.entity_task_rewards.assign(m, std::vector<double>(2, 0.0));
    const double md = static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      r.info.delay_ms[j] = delays[j] * 1000.0;
      r.info.accuracy[j] = table_.levels[action.level[j]].accuracy;
      r.entity_task_rewards[j][0] = -delays[j] / (md * delay_norm_);
      r.entity_task_rewards[j][1] = r.info.accuracy[j] / md;
      r.r_delay += r.entity_task_rewards[j][0];
      r.r_acc += r.entity_task_rewards[j][1];
      r.info.mean_delay_ms += r.info.delay_ms[j] / md;
      r.info.mean_accuracy += r.info.accuracy[j] / md;
    }
    const double task_rewards[] = {r.r_delay, r.r_acc};
    r.r_global = global_(task_rewards);

    episode_delay_sum_ += r.info.mean_delay_ms;
    episode_acc_sum_ += r.info.mean_accuracy;
    ++episode_samples_;

    std::fill(state_.loads.begin(), state_.loads.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) state_.loads[action.server[j]] += 1.0;
    state_.last_delays_ms = r.info.delay_ms;
    redraw_gains();
    ++state_.step;
    r.terminal = state_.step >= cfg_.episode_length;
    r.next = state_;
    return r;
  }

  /// Task 0: log gains to every server, scaled so a near link reads 0 and a
  /// far link -1 (floored at -2), + loads.
  /// Task 1: the same gains + log1p of last-step delays relative to the
  /// near-server level-L delay, scaled so the normalizing delay reads 1.
  /// Both end with the elapsed fraction of the episode.
  Observation observe() const {
    const std::size_t m = cfg_.m_vehicles, e = cfg_.e_servers;
    const double span = std::max(1e-12, std::abs(std::log(cfg_.near_gain / cfg_.far_gain)));
    Vec gains;
    gains.reserve(m * e);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t s = 0; s < e; ++s)
        gains.push_back(std::clamp(std::log(state_.gains[j][s] / cfg_.near_gain) / span, -2.0, 2.0));
    Vec alloc = gains;
    for (double l : state_.loads) alloc.push_back(l / static_cast<double>(m));
    Vec level = gains;
    for (double d : state_.last_delays_ms) level.push_back(std::log1p(d / (1000.0 * delay_ref_)) / std::log1p(delay_norm_ / delay_ref_));
    const double elapsed = static_cast<double>(state_.step) / static_cast<double>(cfg_.episode_length);
    alloc.push_back(elapsed);
    level.push_back(elapsed);
    return Observation{{std::move(alloc), std::move(level)}};
  }

  Observation reset_generic() {
    reset();
    return observe();
  }

  GenericStep step_generic(const JointAction& action) {
    if (action.size() != 2) throw ShapeError("vehicle env has exactly two tasks");
    auto r = step(VehicleAction{action[0], action[1]});
    GenericStep g;
    g.entity_task_rewards = std::move(r.entity_task_rewards);
    g.global_reward = r.r_global;
    g.terminal = r.terminal;
    g.next = observe();
    return g;
  }

  MetricList episode_metrics() const {
    const double n = static_cast<double>(std::max<std::size_t>(episode_samples_, 1));
    return {{"mean_delay_ms", episode_delay_sum_ / n}, {"mean_accuracy", episode_acc_sum_ / n}};
  }

 private:
  void redraw_gains() {
    for (std::size_t j = 0; j < cfg_.m_vehicles; ++j)
      for (std::size_t s = 0; s < cfg_.e_servers; ++s)
        state_.gains[j][s] = draw_gain(state_.mean_gains[j][s], cfg_.fading, rng_);
  }

  VehicleConfig cfg_;
  RngStream rng_;
  GlobalRewardRule global_;
  LevelTable table_;
  double delay_norm_ = 1.0;
  double delay_ref_ = 1.0;
  VehicleState state_;
  double episode_delay_sum_ = 0.0;
  double episode_acc_sum_ = 0.0;
  std::size_t episode_samples_ = 0;
};

inline VehicleState veh_reset(const VehicleConfig& cfg, std::uint64_t seed) {
  VehicleEnv env(cfg, seed);
  return env.reset();
}

struct VehicleMetrics {
  double mean_delay_ms = 0.0;
  double mean_accuracy = 0.0;
};

/// Arithmetic means over steps and vehicles.
inline VehicleMetrics veh_metrics(const std::vector<VehicleInfo>& episode) {
  if (episode.empty()) throw InvalidArgument("veh_metrics: empty episode");
  VehicleMetrics out;
  std::size_t count = 0;
  for (const auto& info : episode) {
    for (std::size_t j = 0; j < info.delay_ms.size(); ++j) {
      out.mean_delay_ms += info.delay_ms[j];
      out.mean_accuracy += info.accuracy[j];
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("veh_metrics: empty episode");
  out.mean_delay_ms /= static_cast<double>(count);
  out.mean_accuracy /= static_cast<double>(count);
  return out;
}

}  // namespace metamec
