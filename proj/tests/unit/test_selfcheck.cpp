#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "oracles.hpp"
#include "pnr/selfcheck.hpp"

namespace {

TEST(Selfcheck, QuickSuitePassesInTime) {
  const auto t0 = std::chrono::steady_clock::now();
  pnr::SelfTestOptions o;
  o.quick = true;
  const auto r = pnr::run_selftest(o);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& x : r.results) EXPECT_TRUE(x.passed) << x.name << ": " << x.detail;
  EXPECT_TRUE(r.passed());
  EXPECT_LT(dt, 10.0);
}

TEST(Selfcheck, CorruptedPenaltyTableIsCaught) {
  pnr::SelfTestOptions o;
  o.quick = true;
  o.config.redistribution_penalty[5] *= 1.05;
  const auto r = pnr::run_selftest(o);
  EXPECT_FALSE(r.passed());
  int failed = 0;
  for (const auto& x : r.results) {
    if (x.passed) continue;
    ++failed;
    EXPECT_EQ(x.name, "redistribution_table");
  }
  EXPECT_EQ(failed, 1);
  std::ostringstream out;
  pnr::write_report(out, r);
  EXPECT_NE(out.str().find("FAIL"), std::string::npos);
}

TEST(Selfcheck, RedistributionChecks) {
  EXPECT_EQ(pnr::check_redistribution_table(pnr::SimConfig::parallel28()), "");
  EXPECT_EQ(pnr::check_redistribution_table(pnr::SimConfig::single_pixel()), "");
  auto cfg = pnr::SimConfig::parallel28();
  cfg.redistribution_penalty[0] = 0.99;
  EXPECT_NE(pnr::check_redistribution_table(cfg), "");
  cfg = pnr::SimConfig::parallel28();
  std::swap(cfg.redistribution_penalty[2], cfg.redistribution_penalty[3]);
  EXPECT_NE(pnr::check_redistribution_table(cfg), "");
}

TEST(Selfcheck, BruteForceAgreesWithIndependentEnumeration) {
  for (int n = 0; n <= 3; ++n) {
    EXPECT_NEAR(pnr::brute_force_pnm(3, 0.7, n, 4), oracle::enumerate_pnm(3, 0.7, n, 4), 1e-14);
  }
}

}  // namespace
