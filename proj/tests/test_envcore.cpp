#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "metamec/envcore.hpp"

using namespace metamec;

TEST(ShannonRate, UnitSnrGivesBandwidth) {
  // p*g/(n0*b) = 0.5e-6 * 2e-6 / (1e-18 * 1e6) = 1
  EXPECT_NEAR(shannon_rate(1e6, 0.5e-6, 2e-6, 1e-18), 1e6, 1e-6);
}

TEST(ShannonRate, SnrOneThousand) {
  // 0.1 * 1e-7 / (1e-17 * 1e6) = 1000 -> 1e6 * log2(1001)
  EXPECT_NEAR(shannon_rate(1e6, 0.1, 1e-7, 1e-17), 9.9672e6, 1e2);
  EXPECT_NEAR(shannon_rate(1e6, 0.1, 1e-7, 1e-17), 9967226.258836, 1e-3);
  // with n0 = 1e-14 the same inputs give snr 1
  EXPECT_NEAR(shannon_rate(1e6, 0.1, 1e-7, 1e-14), 1e6, 1e-6);
}

TEST(ShannonRate, VanishingGainVanishingRate) {
  double prev = shannon_rate(1e6, 0.1, 1e-12, 1e-14);
  for (double g = 1e-13; g > 1e-25; g /= 10.0) {
    const double r = shannon_rate(1e6, 0.1, g, 1e-14);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_GT(prev, 0.0);
  EXPECT_LT(prev, 1e-3);
}

TEST(ShannonRate, RejectsNonPositiveInputs) {
  EXPECT_THROW(shannon_rate(0.0, 0.1, 1e-7, 1e-14), InvalidArgument);
  EXPECT_THROW(shannon_rate(1e6, -0.1, 1e-7, 1e-14), InvalidArgument);
  EXPECT_THROW(shannon_rate(1e6, 0.1, 0.0, 1e-14), InvalidArgument);
  EXPECT_THROW(shannon_rate(1e6, 0.1, 1e-7, 0.0), InvalidArgument);
}

TEST(ShannonRate, MonotoneOnGrids) {
  const std::vector<double> grid{0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0};
  for (double a : grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
      EXPECT_GT(shannon_rate(1e6, 0.1 * grid[i], 1e-9 * a, 1e-16), shannon_rate(1e6, 0.1 * grid[i - 1], 1e-9 * a, 1e-16));
      EXPECT_GT(shannon_rate(1e6, 0.1 * a, 1e-9 * grid[i], 1e-16), shannon_rate(1e6, 0.1 * a, 1e-9 * grid[i - 1], 1e-16));
      EXPECT_GT(shannon_rate(1e6 * grid[i], 0.1 * a, 1e-9, 1e-16), shannon_rate(1e6 * grid[i - 1], 0.1 * a, 1e-9, 1e-16));
    }
  }
}

TEST(ShareChannel, SingleMemberGetsFullBand) {
  const ChannelModel ch{20e6, 1e-20, 1, Fading::static_gain};
  const std::vector<Transmitter> tx{{0.2, 1e-10}};
  const auto r = share_channel(ch, tx);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0], shannon_rate(20e6, 0.2, 1e-10, 1e-20));
}

TEST(ShareChannel, TwoMembersHandComputed) {
  // b = 1e7 each, snr = 0.2 * 1e-10 / (1e-20 * 1e7) = 200
  const ChannelModel ch{20e6, 1e-20, 1, Fading::static_gain};
  const std::vector<Transmitter> tx{{0.2, 1e-10}, {0.2, 1e-10}};
  const auto r = share_channel(ch, tx);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 76510516.911789, 1e-3);
  EXPECT_DOUBLE_EQ(r[0], r[1]);
}

TEST(ShareChannel, PerMemberRateNonIncreasingInMemberCount) {
  const ChannelModel ch{20e6, 1e-20, 1, Fading::static_gain};
  for (double g : {1e-14, 1e-12, 1e-10, 1e-8}) {
    double prev = INFINITY;
    for (std::size_t m = 1; m <= 8; ++m) {
      const std::vector<Transmitter> tx(m, Transmitter{0.2, g});
      const double r = share_channel(ch, tx)[0];
      EXPECT_LE(r, prev) << "m=" << m << " g=" << g;
      prev = r;
    }
  }
}

TEST(ShareChannel, ZeroGainMemberIsUnreachable) {
  const ChannelModel ch{20e6, 1e-20, 1, Fading::static_gain};
  const std::vector<Transmitter> tx{{0.2, 0.0}, {0.2, 1e-10}};
  const auto r = share_channel(ch, tx);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_GT(r[1], 0.0);
  EXPECT_TRUE(share_channel(ch, std::vector<Transmitter>{}).empty());
}

TEST(TxDelay, Examples) {
  EXPECT_EQ(*tx_delay(0.0, 1e6), 0.0);
  EXPECT_EQ(tx_energy(0.3, *tx_delay(0.0, 1e6)), 0.0);
  EXPECT_DOUBLE_EQ(*tx_delay(1e6, 1e6), 1.0);
  EXPECT_NEAR(*tx_delay(2.5e7, shannon_rate(1e6, 0.1, 1e-7, 1e-17)), 2.5082, 1e-4);
  EXPECT_DOUBLE_EQ(tx_energy(0.2, 0.5), 0.1);
}

TEST(TxDelay, ZeroRateSignalsUnreachable) {
  EXPECT_FALSE(tx_delay(1.0, 0.0).has_value());
  EXPECT_EQ(*tx_delay(0.0, 0.0), 0.0);
  EXPECT_THROW(tx_delay(-1.0, 1e6), InvalidArgument);
}

TEST(LocalCompute, Examples) {
  EXPECT_DOUBLE_EQ(local_compute(1e9, 1e9, 1e-27).delay_s, 1.0);
  const auto c = local_compute(8e8, 2e9, 1e-27);
  EXPECT_NEAR(c.delay_s, 0.4, 1e-15);
  EXPECT_NEAR(c.energy_j, 3.2, 1e-12);
}

TEST(LocalCompute, DoublingCapability) {
  const auto a = local_compute(1e9, 1e9, 1e-27), b = local_compute(1e9, 2e9, 1e-27);
  EXPECT_DOUBLE_EQ(b.delay_s, a.delay_s / 2.0);
  EXPECT_DOUBLE_EQ(b.energy_j, 4.0 * a.energy_j);
  EXPECT_DOUBLE_EQ(b.energy_j / b.delay_s, 8.0 * a.energy_j / a.delay_s);
  EXPECT_THROW(local_compute(0.0, 1e9, 1e-27), InvalidArgument);
}

TEST(ServerCompute, Examples) {
  EXPECT_DOUBLE_EQ(server_compute(1e11, 1e11, 1), 1.0);
  EXPECT_NEAR(server_compute(5e9, 1e11, 4), 0.2, 1e-15);
  for (std::size_t m = 1; m <= 6; ++m) EXPECT_NEAR(server_compute(3e9, 1e11, m), 0.03 * m, 1e-15);
  EXPECT_THROW(server_compute(1e9, 1e11, 0), InvalidArgument);
}

TEST(OffloadLowerBound, TotalDelayAtLeastFullBandUplink) {
  const ChannelModel ch{20e6, 1e-20, 1, Fading::static_gain};
  const double bits = 5e5, full = *tx_delay(bits, shannon_rate(ch.bandwidth_hz, 0.2, 1e-10, ch.noise_density));
  for (std::size_t m = 1; m <= 5; ++m) {
    const std::vector<Transmitter> tx(m, Transmitter{0.2, 1e-10});
    const double total = *tx_delay(bits, share_channel(ch, tx)[0]) + server_compute(5e7, 1e11, m);
    EXPECT_GE(total, full);
  }
}

TEST(Fading, StaticReturnsMean) {
  RngStream rng(1, "f");
  EXPECT_EQ(draw_gain(3e-10, Fading::static_gain, rng), 3e-10);
}

TEST(Fading, RayleighEmpiricalMeanWithinTwoPercent) {
  RngStream rng(17, "fading");
  const double mean = 2e-10;
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double g = draw_gain(mean, Fading::rayleigh_block, rng);
    ASSERT_GE(g, 0.0);
    sum += g;
  }
  EXPECT_NEAR(sum / 100000.0 / mean, 1.0, 0.02);
}

TEST(QosPreset, MetaverseConstants) {
  const EnvPreset& p = find_preset("metaverse-spec");
  EXPECT_EQ(p.qos.pixels_per_scene, 64e6);
  EXPECT_EQ(p.qos.target_fps, 120.0);
  EXPECT_EQ(p.qos.render_rate_bps, 1e9);
  EXPECT_EQ(p.qos.mtp_limit_ms, 20.0);
  EXPECT_EQ(p.qos.haptic_limit_ms, 1.0);
  EXPECT_EQ(p.scene_scale, 1.0);
  EXPECT_EQ(p.workload_scale, 1.0);
}

TEST(QosPreset, DeskScaleKeepsQosLimits) {
  const EnvPreset& p = find_preset("desk-scale");
  EXPECT_EQ(p.qos.mtp_limit_ms, 20.0);
  EXPECT_LT(p.scene_scale, 1.0);
  EXPECT_THROW(find_preset("nope"), ConfigError);
}

TEST(RunningStandardizer, HandValues) {
  RunningStandardizer s;
  EXPECT_EQ(s.push(1.0), 0.0);
  // mean 2, sample sd sqrt(2)
  EXPECT_NEAR(s.push(3.0), 1.0 / std::sqrt(2.0), 1e-15);
  // mean 3, sample sd 2
  EXPECT_NEAR(s.push(5.0), 1.0, 1e-15);
  EXPECT_EQ(s.count(), 3u);
  EXPECT_DOUBLE_EQ(s.mean(), 3.0);
}

TEST(RunningStandardizer, ConstantStreamStaysZero) {
  RunningStandardizer s;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s.push(4.0), 0.0);
}

TEST(GlobalRewardRule, MeanOfStandardizedTasks) {
  GlobalRewardRule g(2);
  const double a[] = {1.0, 10.0}, b[] = {3.0, 10.0}, c[] = {5.0, 30.0};
  EXPECT_EQ(g(a), 0.0);
  EXPECT_NEAR(g(b), 0.5 / std::sqrt(2.0), 1e-15);
  // task 0 -> 1.0; task 1: values 10,10,30: mean 50/3, sd sqrt(400/3), z = (40/3)/sqrt(400/3)
  EXPECT_NEAR(g(c), 0.5 * (1.0 + (40.0 / 3.0) / std::sqrt(400.0 / 3.0)), 1e-14);
  const double wrong[] = {1.0};
  EXPECT_THROW(g(wrong), ShapeError);
}
