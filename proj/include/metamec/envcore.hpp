#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metamec/errors.hpp"
#include "metamec/rng.hpp"

namespace metamec {

// ---------------------------------------------------------------------------
// QoS constants and presets
// ---------------------------------------------------------------------------

/// Metaverse display/interaction requirements. Values are fixed per preset
/// and never mutated at runtime.
struct QosPreset {
  double pixels_per_scene;
  double target_fps;
  double render_rate_bps;
  double mtp_limit_ms;
  double haptic_limit_ms;
};

inline constexpr QosPreset kMetaverseQos{64e6, 120.0, 1e9, 20.0, 1.0};

/// Physical scale of one environment preset. `metaverse-spec` uses the full
/// per-frame payload implied by the QoS constants; `desk-scale` shrinks scene
/// payloads and workloads so that training stays cheap.
struct EnvPreset {
  std::string_view name;
  QosPreset qos;
  double scene_scale;     // multiplies every scene/upload payload in bits
  double workload_scale;  // multiplies every workload in cycles
  std::string_view description;
};

inline constexpr EnvPreset kMetaverseSpecPreset{
    "metaverse-spec", kMetaverseQos, 1.0, 1.0,
    "full-size scenes: 64e6 px, 120 FPS, 1 Gbps rendering, 20 ms MTP, 1 ms haptic"};

inline constexpr EnvPreset kDeskScalePreset{
    "desk-scale", kMetaverseQos, 0.125, 0.125,
    "same QoS limits with scene payloads and workloads scaled by 1/8"};

inline constexpr EnvPreset kEnvPresets[] = {kMetaverseSpecPreset, kDeskScalePreset};

inline const EnvPreset& find_preset(std::string_view name) {
  for (const auto& p : kEnvPresets)
    if (p.name == name) return p;
  throw ConfigError("unknown env preset \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------
// Channel, compute and energy models
// ---------------------------------------------------------------------------

enum class Fading { static_gain, rayleigh_block };

struct ChannelModel {
  double bandwidth_hz = 20e6;      // per channel
  double noise_density = 1e-20;    // W/Hz
  std::size_t channel_count = 1;
  Fading fading = Fading::rayleigh_block;

  void validate() const {
    if (!(bandwidth_hz > 0.0) || !(noise_density > 0.0)) throw ConfigError("channel: B and N0 must be positive");
    if (channel_count < 1) throw ConfigError("channel: need at least one channel");
  }
};

struct ComputeModel {
  double server_cycles_per_s = 1e11;

  void validate() const {
    if (!(server_cycles_per_s > 0.0)) throw ConfigError("compute: server capacity must be positive");
  }
};

struct EnergyModel {
  double kappa = 1e-27;  // J s^2 / cycle^3, energy per cycle = kappa * c^2

  void validate() const {
    if (!(kappa > 0.0)) throw ConfigError("energy: kappa must be positive");
  }
};

/// Shannon capacity of a band share: b * log2(1 + p g / (n0 b)).
inline double shannon_rate(double b_share, double p, double g, double n0) {
  if (!(b_share > 0.0) || !(p > 0.0) || !(g > 0.0) || !(n0 > 0.0))
    throw InvalidArgument("shannon_rate: all inputs must be positive");
  return b_share * std::log1p(p * g / (n0 * b_share)) / std::numbers::ln2;
}

struct Transmitter {
  double tx_power;  // W
  double gain;      // current (possibly faded) power gain
};

/// Orthogonal equal split of one channel among its members. A member with
/// zero gain cannot reach the receiver and gets rate 0.
inline std::vector<double> share_channel(const ChannelModel& channel, std::span<const Transmitter> members) {
  std::vector<double> rates;
  rates.reserve(members.size());
  if (members.empty()) return rates;
  const double b_share = channel.bandwidth_hz / static_cast<double>(members.size());
  for (const auto& m : members)
    rates.push_back(m.gain > 0.0 ? shannon_rate(b_share, m.tx_power, m.gain, channel.noise_density) : 0.0);
  return rates;
}

/// Seconds to push `bits` at `rate`; nullopt when the link is unreachable
/// (zero rate with a non-empty payload), which callers treat as a deadline miss.
inline std::optional<double> tx_delay(double bits, double rate) {
  if (bits < 0.0) throw InvalidArgument("tx_delay: negative payload");
  if (bits == 0.0) return 0.0;
  if (!(rate > 0.0)) return std::nullopt;
  return bits / rate;
}

inline double tx_energy(double tx_power, double delay_s) { return tx_power * delay_s; }

struct ComputeCost {
  double delay_s;
  double energy_j;
};

/// On-device execution: delay W/c, energy kappa c^2 W.
inline ComputeCost local_compute(double workload, double capability, double kappa) {
  if (!(workload > 0.0) || !(capability > 0.0) || !(kappa > 0.0))
    throw InvalidArgument("local_compute: inputs must be positive");
  return {workload / capability, kappa * capability * capability * workload};
}

/// Edge execution with the server split equally among `assigned` jobs.
inline double server_compute(double workload, double server_cycles, std::size_t assigned) {
  if (!(workload > 0.0) || !(server_cycles > 0.0) || assigned == 0)
    throw InvalidArgument("server_compute: inputs must be positive");
  return workload / (server_cycles / static_cast<double>(assigned));
}

/// Per-step power gain around `mean_gain`.
inline double draw_gain(double mean_gain, Fading fading, RngStream& rng) {
  return fading == Fading::static_gain ? mean_gain : mean_gain * rng.exponential();
}

// ---------------------------------------------------------------------------
// Global reward rule
// ---------------------------------------------------------------------------

/// Welford running mean/variance.
class RunningStandardizer {
 public:
  /// Adds x to the statistics and returns its standardized value under the
  /// updated statistics (0 until two samples have been seen).
  double push(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
    if (count_ < 2) return 0.0;
    const double sd = std::sqrt(m2_ / static_cast<double>(count_ - 1));
    return sd > 1e-8 ? (x - mean_) / sd : 0.0;
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// r_g = mean over tasks of the running-standardized per-task reward.
class GlobalRewardRule {
 public:
  explicit GlobalRewardRule(std::size_t tasks = 0) : per_task_(tasks) {}

  double operator()(std::span<const double> task_rewards) {
    if (task_rewards.size() != per_task_.size()) throw ShapeError("global reward: task count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < task_rewards.size(); ++k) s += per_task_[k].push(task_rewards[k]);
    return s / static_cast<double>(task_rewards.size());
  }

 private:
  std::vector<RunningStandardizer> per_task_;
};

}  // namespace metamec
