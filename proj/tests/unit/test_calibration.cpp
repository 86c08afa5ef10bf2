#include <gtest/gtest.h>

#include <cmath>

#include "pnr/calibration.hpp"
#include "pnr/errors.hpp"

namespace {

TEST(Calibration, PenaltyTableShape) {
  const auto t = pnr::penalty_table(4, 0.9, 0.5);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[0], 1.0);
  EXPECT_DOUBLE_EQ(t[1], 0.9);
  EXPECT_DOUBLE_EQ(t[3], 0.9 / 2.0);
}

TEST(Calibration, AnchorPenaltyReproducesRecoveryTarget) {
  const auto cfg = pnr::SimConfig::parallel28();
  const double f1 = pnr::anchor_penalty(cfg, 5.0, 0.96);
  EXPECT_NEAR(f1, 0.96 * 28.0 / (27.0 + 0.1), 1e-12);
  EXPECT_NEAR(cfg.penalty(1), f1, 1e-12);
}

TEST(Calibration, RateGrid) {
  const auto g = pnr::rate_grid(1e6, 1e8, 4);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front(), 1e6);
  EXPECT_NEAR(g.back(), 1e8, 1e-3);
  EXPECT_NEAR(g[1] / g[0], std::pow(10.0, 0.25), 1e-12);
}

TEST(Calibration, ShippedSlopeReproducesTargetMcr) {
  const auto cfg = pnr::SimConfig::parallel28();
  const auto scan = pnr::rate_scan(cfg, pnr::rate_grid(1e6, 3e9, 8));
  EXPECT_NEAR(scan.mcr / 250e6, 1.0, 0.01);
}

TEST(Calibration, UnreachableTargetThrows) {
  auto cfg = pnr::SimConfig::parallel28();
  cfg.shard_photons = 4096;
  pnr::CalibrationOptions o;
  o.target_mcr = 5e9;
  o.input_rates = pnr::rate_grid(1e7, 3e9, 2);
  o.scan.photons_per_point = 2e4;
  EXPECT_THROW(pnr::calibrate_penalty(cfg, cfg.penalty(1), o), pnr::ConvergenceError);
}

}  // namespace
