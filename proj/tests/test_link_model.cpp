#include <random>

#include <gtest/gtest.h>

#include "coex/link_model.hpp"
#include "support/instances.hpp"

namespace coex {
namespace {

UserState user(int cqi, PowerMode mode) {
  UserState u;
  u.cqi = cqi;
  u.power_mode = mode;
  return u;
}

ChannelState channel(double bw) {
  ChannelState c;
  c.bandwidth_hz = bw;
  return c;
}

const SpectralEfficiencyTable kTable;
const PowerProfile kProfile;

TEST(SpectralEfficiency, CqiZeroIsZeroInEveryMode) {
  for (PowerMode m : kPowerModes) EXPECT_EQ(spectral_efficiency(user(0, m), kTable, kProfile), 0.0);
}

TEST(SpectralEfficiency, TableLookup) {
  EXPECT_DOUBLE_EQ(spectral_efficiency(user(15, PowerMode::Med), kTable, kProfile), 5.5547);
  // 1.9141 is ladder entry 8; entry 7 is 1.4766.
  EXPECT_DOUBLE_EQ(spectral_efficiency(user(8, PowerMode::Low), kTable, kProfile), 1.53128);
  EXPECT_DOUBLE_EQ(spectral_efficiency(user(7, PowerMode::Low), kTable, kProfile), 1.4766 * 0.8);
}

TEST(SpectralEfficiency, MatchesReferenceLadder) {
  for (int q = 0; q <= 15; ++q) {
    for (PowerMode m : kPowerModes) {
      EXPECT_DOUBLE_EQ(spectral_efficiency(user(q, m), kTable, kProfile), testing::ref_se(user(q, m)));
    }
  }
}

TEST(RawRate, ZeroDuty) { EXPECT_EQ(raw_rate(user(10, PowerMode::Med), channel(160e6), 0.0, kTable, kProfile), 0.0); }

TEST(RawRate, HandComputed) {
  SpectralEfficiencyTable unit;
  unit.se_by_cqi.fill(1.0);
  EXPECT_DOUBLE_EQ(raw_rate(user(5, PowerMode::Med), channel(160e6), 0.25, unit, kProfile), 4.0e7);
}

TEST(RawRate, CqiZeroUser) {
  EXPECT_EQ(raw_rate(user(0, PowerMode::High), channel(160e6), 0.7, kTable, kProfile), 0.0);
}

TEST(LbtLoss, HandEvaluatedPoints) {
  EXPECT_EQ(lbt_loss(0.1, 0.0, 0.7), 0.1);
  EXPECT_DOUBLE_EQ(lbt_loss(0.1, 0.5, 0.4), 0.22);
  EXPECT_EQ(lbt_loss(0.9, 1.0, 1.0), 0.95);
}

TEST(LbtLoss, DutyIsClampedToUnitInterval) {
  EXPECT_EQ(lbt_loss(0.1, 1.7, 0.3), lbt_loss(0.1, 1.0, 0.3));
  EXPECT_EQ(lbt_loss(0.1, -0.2, 0.3), lbt_loss(0.1, 0.0, 0.3));
}

TEST(LbtLoss, SlopeInDutyBelowKink) {
  // d loss / d tau = 0.6 b away from the kink and the cap.
  const double f = 0.05, b = 0.3, tau = 0.2, h = 1e-6;
  const double slope = (lbt_loss(f, tau + h, b) - lbt_loss(f, tau - h, b)) / (2 * h);
  EXPECT_NEAR(slope, 0.6 * b, 1e-6);
}

TEST(LbtLoss, MonotoneAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> uf(0.0, 0.5);
  for (int i = 0; i < 20000; ++i) {
    const double f = uf(rng), tau = u01(rng), b = u01(rng), d = u01(rng) * 0.1;
    const double l = lbt_loss(f, tau, b);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, kMaxLbtLoss);
    EXPECT_LE(l, lbt_loss(f, std::min(1.0, tau + d), b));
    EXPECT_LE(l, lbt_loss(f, tau, std::min(1.0, b + d)));
    EXPECT_LE(l, lbt_loss(std::min(0.5, f + d), tau, b));
    EXPECT_EQ(l, testing::ref_loss(f, tau, b));
  }
}

TEST(Goodput, Cases) {
  EXPECT_EQ(goodput(1e6, 0.0), 1e6);
  EXPECT_NEAR(goodput(1e6, 0.95), 5e4, 1e-6);
  EXPECT_EQ(goodput(0.0, 0.3), 0.0);
}

TEST(Energy, ZeroServedIsZero) {
  EXPECT_EQ(energy_joules(user(7, PowerMode::Med), channel(160e6), 0.0, kTable, kProfile), 0.0);
}

TEST(Energy, HandComputed) {
  SpectralEfficiencyTable two;
  two.se_by_cqi.fill(2.0);
  const auto u = user(9, PowerMode::Med);  // 0.2 W, eta 1
  EXPECT_DOUBLE_EQ(energy_per_bit(u, channel(160e6), two, kProfile), 0.2 / 3.2e8);
  EXPECT_DOUBLE_EQ(energy_joules(u, channel(160e6), 3.2e7, two, kProfile), 0.02);
}

TEST(Energy, LinearInServedBits) {
  const auto u = user(12, PowerMode::High);
  const double e1 = energy_joules(u, channel(80e6), 1.5e6, kTable, kProfile);
  const double e2 = energy_joules(u, channel(80e6), 3.0e6, kTable, kProfile);
  EXPECT_DOUBLE_EQ(e2, 2 * e1);
}

TEST(Energy, ZeroRateUserServingBitsThrows) {
  EXPECT_THROW(energy_joules(user(0, PowerMode::Med), channel(160e6), 10.0, kTable, kProfile),
               EnergyUndefinedError);
}

}  // namespace
}  // namespace coex
