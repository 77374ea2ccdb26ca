#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "metamec/env_vehicle.hpp"

using namespace metamec;

namespace {

VehicleState uniform_state(const VehicleConfig& cfg, double gain) {
  VehicleState s;
  s.mean_gains.assign(cfg.m_vehicles, std::vector<double>(cfg.e_servers, gain));
  s.gains = s.mean_gains;
  s.loads.assign(cfg.e_servers, 0.0);
  s.last_delays_ms.assign(cfg.m_vehicles, 0.0);
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

VehicleAction random_action(const VehicleConfig& cfg, RngStream& rng) {
  VehicleAction a;
  for (std::size_t j = 0; j < cfg.m_vehicles; ++j) {
    a.server.push_back(rng.below(cfg.e_servers));
    a.level.push_back(rng.below(cfg.levels));
  }
  return a;
}

// Explicit physical constants for the hand-computed cases, independent of
// the tuned defaults.
VehicleConfig hand_config() {
  VehicleConfig c;
  c.base_level_bits = 8e5;
  c.detect_workload = 4e9;
  c.near_gain = 5e-11;
  c.far_gain = 5e-14;
  c.extra_near_prob = 0.0;
  c.fading = Fading::static_gain;
  c.bandwidth_hz = 10e6;
  c.tx_power = 0.2;
  c.noise_density = 1e-20;
  c.server_cycles = 1e11;
  return c;
}

}  // namespace

TEST(LevelTable, DefaultFormAndMonotonicity) {
  const auto t = LevelTable::saturating(4, 1e5);
  ASSERT_EQ(t.size(), 4u);
  for (std::size_t l = 0; l < 4; ++l) {
    const double ld = static_cast<double>(l + 1);
    EXPECT_DOUBLE_EQ(t.levels[l].scene_bits, ld * 1e5);
    EXPECT_DOUBLE_EQ(t.levels[l].accuracy, 0.95 - 0.6 * std::exp(-0.9 * ld));
    if (l > 0) {
      EXPECT_GT(t.levels[l].scene_bits, t.levels[l - 1].scene_bits);
      EXPECT_GT(t.levels[l].accuracy, t.levels[l - 1].accuracy);
    }
  }
  EXPECT_LE(t.levels.back().accuracy, 1.0);
  EXPECT_NO_THROW(t.validate());
}

TEST(LevelTable, RejectsNonMonotoneTables) {
  EXPECT_THROW((LevelTable{{{2e5, 0.5}, {1e5, 0.6}}}.validate()), ConfigError);
  EXPECT_THROW((LevelTable{{{1e5, 0.6}, {2e5, 0.6}}}.validate()), ConfigError);
  EXPECT_THROW((LevelTable{{{1e5, 1.2}}}.validate()), ConfigError);
  EXPECT_THROW(LevelTable{}.validate(), ConfigError);
}

TEST(VehicleReset, SameSeedIdenticalState) { EXPECT_EQ(veh_reset(VehicleConfig{}, 3), veh_reset(VehicleConfig{}, 3)); }

TEST(VehicleReset, SixGainEntriesForThreeVehiclesTwoServers) {
  VehicleConfig cfg;
  cfg.m_vehicles = 3;
  VehicleEnv env(cfg, 1);
  env.reset();
  const auto obs = env.observe();
  // 6 gains + 2 loads + elapsed
  EXPECT_EQ(obs.task_states[0].size(), 9u);
  EXPECT_EQ(env.layout().task_state_dims[0], 9u);
  for (double l : env.state().loads) EXPECT_EQ(l, 0.0);
}

TEST(VehicleReset, EveryVehicleHasANearServer) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = veh_reset(VehicleConfig{}, seed);
    for (const auto& row : s.mean_gains) {
      bool near = false;
      for (double g : row) near = near || g == VehicleConfig{}.near_gain;
      EXPECT_TRUE(near);
    }
  }
}

TEST(VehicleReset, SingleServerIsDegenerate) {
  VehicleConfig cfg;
  cfg.e_servers = 1;
  VehicleEnv env(cfg, 1);
  EXPECT_EQ(env.layout().action_sizes[0], std::vector<std::size_t>(4, 1));
}

TEST(VehicleConfigValidation, RejectsBadValues) {
  VehicleConfig c;
  c.levels = 0;
  EXPECT_THROW(VehicleEnv(c, 1), ConfigError);
  c = VehicleConfig{};
  c.extra_near_prob = 1.5;
  EXPECT_THROW(VehicleEnv(c, 1), ConfigError);
  c = VehicleConfig{};
  c.level_table = {{1e5, 0.5}};
  EXPECT_THROW(VehicleEnv(c, 1), ConfigError);
}

TEST(VehicleStep, SingleVehicleLevelTradeoff) {
  VehicleConfig cfg;
  cfg.m_vehicles = 1;
  VehicleEnv lo(cfg, 2), hi(cfg, 2);
  lo.reset();
  hi.reset();
  const auto a = lo.step({{0}, {0}}), b = hi.step({{0}, {cfg.levels - 1}});
  EXPECT_LT(a.info.mean_delay_ms, b.info.mean_delay_ms);
  EXPECT_LT(a.info.mean_accuracy, b.info.mean_accuracy);
}

TEST(VehicleStep, OneServerOneLevelEveryPolicyIdentical) {
  VehicleConfig cfg;
  cfg.e_servers = 1;
  cfg.levels = 1;
  VehicleEnv env(cfg, 1);
  env.reset();
  const auto first = env.step({{0, 0, 0, 0}, {0, 0, 0, 0}});
  for (int t = 0; t < 5; ++t) {
    const auto r = env.step({{0, 0, 0, 0}, {0, 0, 0, 0}});
    EXPECT_EQ(r.info.mean_delay_ms, first.info.mean_delay_ms);
    EXPECT_EQ(r.info.mean_accuracy, first.info.mean_accuracy);
  }
}

TEST(VehicleStep, TwoVehiclesTwoServersHandComputed) {
  // Desk scale: S_l = l * 1e5 bits, W = 5e8 cycles, 10 MHz bands.
  // Vehicles 0 and 1 share near server 0: b = 5e6, snr = 200, rate = 5e6*log2(201);
  // compute 5e8 / 5e10 = 10 ms.
  VehicleConfig cfg = hand_config();
  cfg.m_vehicles = 2;
  const auto table = cfg.table();
  VehicleState s = uniform_state(cfg, cfg.near_gain);
  const auto d = vehicle_delays(cfg, table, s, {{0, 0}, {0, 3}}, vehicle_delay_norm(cfg));
  EXPECT_NEAR(d[0] * 1e3, 12.614019720068, 1e-9);
  EXPECT_NEAR(d[1] * 1e3, 20.456078880271, 1e-9);

  // One far vehicle alone on server 1 at level 2: b = 1e7, snr = 0.1.
  s.gains[1][1] = cfg.far_gain;
  const auto e = vehicle_delays(cfg, table, s, {{0, 1}, {0, 1}}, vehicle_delay_norm(cfg));
  EXPECT_NEAR(e[1] * 1e3, 150.450817946834, 1e-9);
}

TEST(VehicleStep, DelayNormIsWorstLevelLSingleVehicle) {
  VehicleConfig cfg = hand_config();
  // lone far vehicle at level 4: b = 1e7, snr = 0.1
  const double far_rate = shannon_rate(cfg.bandwidth_hz, cfg.tx_power, cfg.far_gain, cfg.noise_density);
  EXPECT_DOUBLE_EQ(vehicle_delay_norm(cfg), 4e5 / far_rate + 5e8 / 1e11);
  EXPECT_NEAR(vehicle_delay_norm(cfg) * 1e3, 295.901635893669, 1e-9);
  cfg.far_gain = cfg.near_gain;
  EXPECT_DOUBLE_EQ(vehicle_delay_norm(cfg), vehicle_reference_delay(cfg));
}

TEST(VehicleStep, RewardsFollowMetrics) {
  VehicleConfig cfg;
  VehicleEnv env(cfg, 4);
  env.reset();
  RngStream rng(4, "test/veh");
  for (int t = 0; t < 20; ++t) {
    const auto r = env.step(random_action(cfg, rng));
    ASSERT_EQ(r.rewards().size(), 3u);
    EXPECT_NEAR(r.r_delay, -r.info.mean_delay_ms / 1000.0 / env.delay_norm(), 1e-12);
    EXPECT_NEAR(r.r_acc, r.info.mean_accuracy, 1e-15);
    EXPECT_EQ(r.entity_task_rewards.size(), cfg.m_vehicles);
  }
}

TEST(VehicleStep, UnreachableLinkChargedTenNorms) {
  VehicleConfig cfg;
  VehicleState s = uniform_state(cfg, cfg.near_gain);
  s.gains[2][0] = 0.0;
  const double norm = vehicle_delay_norm(cfg);
  const auto d = vehicle_delays(cfg, cfg.table(), s, {{0, 1, 0, 1}, {0, 0, 0, 0}}, norm);
  EXPECT_DOUBLE_EQ(d[2], 10.0 * norm);
}

TEST(VehicleStep, RejectsBadActions) {
  VehicleEnv env(VehicleConfig{}, 1);
  env.reset();
  EXPECT_THROW(env.step({{0, 0, 0}, {0, 0, 0, 0}}), ShapeError);
  EXPECT_THROW(env.step({{0, 0, 0, 2}, {0, 0, 0, 0}}), InvalidArgument);
  EXPECT_THROW(env.step({{0, 0, 0, 0}, {0, 0, 0, 4}}), InvalidArgument);
}

TEST(VehicleInvariants, AccuracyIgnoresAllocationDelayDependsOnBoth) {
  VehicleConfig cfg;
  VehicleEnv env(cfg, 6);
  const VehicleState s = env.reset();
  const auto table = cfg.table();
  const double norm = vehicle_delay_norm(cfg);
  RngStream rng(6, "test/perturb");
  bool alloc_matters = false, level_matters = false;
  for (int trial = 0; trial < 200; ++trial) {
    const VehicleAction a = random_action(cfg, rng);
    VehicleAction b = a, c = a;
    b.server = random_action(cfg, rng).server;
    c.level = random_action(cfg, rng).level;

    VehicleEnv ea(cfg, 6), eb(cfg, 6), ec(cfg, 6);
    ea.reset();
    eb.reset();
    ec.reset();
    const auto ra = ea.step(a), rb = eb.step(b), rc = ec.step(c);
    EXPECT_EQ(ra.r_acc, rb.r_acc);
    alloc_matters = alloc_matters || mean(vehicle_delays(cfg, table, s, a, norm)) != mean(vehicle_delays(cfg, table, s, b, norm));
    level_matters = level_matters || ra.r_delay != rc.r_delay;
  }
  EXPECT_TRUE(alloc_matters);
  EXPECT_TRUE(level_matters);
}

TEST(VehicleInvariants, LevelRaisesDelayAndAccuracyForEveryVehicle) {
  VehicleConfig cfg;
  const auto table = cfg.table();
  const VehicleState s = veh_reset(cfg, 9);
  const double norm = vehicle_delay_norm(cfg);
  RngStream rng(9, "test/levels");
  for (int trial = 0; trial < 50; ++trial) {
    VehicleAction a = random_action(cfg, rng);
    for (std::size_t j = 0; j < cfg.m_vehicles; ++j) {
      if (a.level[j] + 1 >= cfg.levels) continue;
      VehicleAction up = a;
      ++up.level[j];
      EXPECT_GT(vehicle_delays(cfg, table, s, up, norm)[j], vehicle_delays(cfg, table, s, a, norm)[j]);
      EXPECT_GT(table.levels[up.level[j]].accuracy, table.levels[a.level[j]].accuracy);
    }
  }
}

TEST(VehicleInvariants, BalancedAssignmentMinimizesMeanDelay) {
  // Identical servers, every level held fixed and shared, exhaustive over 2^M assignments.
  for (std::size_t m = 1; m <= 4; ++m) {
    VehicleConfig cfg;
    cfg.m_vehicles = m;
    cfg.e_servers = 2;
    const auto table = cfg.table();
    const double norm = vehicle_delay_norm(cfg);
    for (double gain : {cfg.near_gain, cfg.far_gain}) {
      const VehicleState s = uniform_state(cfg, gain);
      for (std::size_t level = 0; level < cfg.levels; ++level) {
        double best_balanced = std::numeric_limits<double>::infinity();
        double best_other = std::numeric_limits<double>::infinity();
        for (std::size_t mask = 0; mask < (1u << m); ++mask) {
          VehicleAction a{std::vector<std::size_t>(m), std::vector<std::size_t>(m, level)};
          std::size_t on_one = 0;
          for (std::size_t j = 0; j < m; ++j) {
            a.server[j] = (mask >> j) & 1u;
            on_one += a.server[j];
          }
          const double d = mean(vehicle_delays(cfg, table, s, a, norm));
          const std::size_t imbalance = on_one > m - on_one ? 2 * on_one - m : m - 2 * on_one;
          (imbalance <= 1 ? best_balanced : best_other) = std::min(imbalance <= 1 ? best_balanced : best_other, d);
        }
        EXPECT_LE(best_balanced, best_other) << "m=" << m << " level=" << level;
      }
    }
  }
}

TEST(VehicleInvariants, BitExactReplay) {
  VehicleConfig cfg;
  cfg.fading = Fading::rayleigh_block;
  VehicleEnv a(cfg, 13), b(cfg, 13);
  a.reset();
  b.reset();
  RngStream rng(13, "test/replay");
  for (int t = 0; t < 200; ++t) {
    const auto act = random_action(cfg, rng);
    const auto ra = a.step(act), rb = b.step(act);
    ASSERT_EQ(ra.next, rb.next);
    ASSERT_EQ(ra.rewards(), rb.rewards());
  }
}

TEST(VehicleMetrics, Means) {
  VehicleInfo a{{10.0, 10.0}, {0.5, 0.5}, 10.0, 0.5}, b{{20.0, 20.0}, {0.7, 0.7}, 20.0, 0.7};
  const auto one = veh_metrics({a, a});
  EXPECT_DOUBLE_EQ(one.mean_delay_ms, 10.0);
  EXPECT_DOUBLE_EQ(one.mean_accuracy, 0.5);
  const auto two = veh_metrics({a, b});
  EXPECT_DOUBLE_EQ(two.mean_delay_ms, 15.0);
  EXPECT_DOUBLE_EQ(two.mean_accuracy, 0.6);
  EXPECT_THROW(veh_metrics({}), InvalidArgument);
}

TEST(VehicleMetrics, EpisodeMetricsMatchInfos) {
  VehicleConfig cfg;
  VehicleEnv env(cfg, 2);
  env.reset();
  RngStream rng(2, "test/ep");
  std::vector<VehicleInfo> infos;
  for (std::size_t t = 0; t < cfg.episode_length; ++t) infos.push_back(env.step(random_action(cfg, rng)).info);
  const auto m = veh_metrics(infos);
  const auto em = env.episode_metrics();
  EXPECT_NEAR(em[0].second, m.mean_delay_ms, 1e-9);
  EXPECT_NEAR(em[1].second, m.mean_accuracy, 1e-12);
}

TEST(VehicleGeneric, ObservationsAreBoundedAndTimed) {
  VehicleConfig cfg;
  VehicleEnv env(cfg, 3);
  auto obs = env.reset_generic();
  ASSERT_EQ(obs.task_states.size(), 2u);
  EXPECT_EQ(obs.task_states[1].size(), env.layout().task_state_dims[1]);
  RngStream rng(3, "test/obs");
  for (int t = 0; t < 64; ++t) {
    const auto a = random_action(cfg, rng);
    const auto g = env.step_generic({a.server, a.level});
    for (const auto& ts : g.next.task_states)
      for (double x : ts) {
        EXPECT_TRUE(std::isfinite(x));
        EXPECT_LE(std::abs(x), 2.0);
      }
    EXPECT_DOUBLE_EQ(g.next.task_states[0].back(), (t + 1) / 64.0);
    EXPECT_EQ(g.terminal, t == 63);
  }
}
