#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pnr/errors.hpp"
#include "pnr/mcsim.hpp"

namespace {

TEST(Jitter, HistogramFwhmOfGaussian) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> d(0.0, 20.0);
  std::vector<double> s(400000);
  for (auto& x : s) x = d(gen);
  EXPECT_NEAR(pnr::histogram_fwhm(s, 1.0), 2.35482 * 20.0, 1.0);
}

TEST(Jitter, DegenerateHistograms) {
  EXPECT_EQ(pnr::histogram_fwhm({}, 1.0), 0.0);
  EXPECT_EQ(pnr::histogram_fwhm({3.0, 3.0, 3.2}, 1.0), 0.0);
  EXPECT_THROW(pnr::histogram_fwhm({1.0}, 0.0), pnr::DomainError);
}

TEST(Jitter, LowRateEqualsSingleClickFwhm) {
  auto cfg = pnr::SimConfig::parallel28();
  pnr::JitterOptions o;
  o.samples = 200000;
  const auto j = pnr::jitter_scan(cfg, {0.0}, o);
  EXPECT_NEAR(j.fwhm_ps[0], 43.0, 1.5);
  EXPECT_FALSE(j.low_statistics[0]);
}

TEST(Jitter, BroadensWithRate) {
  auto cfg = pnr::SimConfig::parallel28();
  pnr::JitterOptions o;
  o.samples = 100000;
  const auto j = pnr::jitter_scan(cfg, {1e6, 100e6, 300e6}, o);
  EXPECT_LT(j.fwhm_ps[0], j.fwhm_ps[1]);
  EXPECT_LT(j.fwhm_ps[1], j.fwhm_ps[2]);
}

TEST(Jitter, IndependentOfWorkers) {
  auto cfg = pnr::SimConfig::parallel28();
  pnr::JitterOptions o;
  o.samples = 20000;
  cfg.workers = 1;
  const auto a = pnr::jitter_scan(cfg, {1e6, 2e8}, o);
  cfg.workers = 3;
  const auto b = pnr::jitter_scan(cfg, {1e6, 2e8}, o);
  EXPECT_EQ(a.fwhm_ps, b.fwhm_ps);
}

TEST(Jitter, LowStatisticsFlag) {
  pnr::JitterOptions o;
  o.samples = 1000;
  const auto j = pnr::jitter_scan(pnr::SimConfig::parallel28(), {1e6}, o);
  EXPECT_TRUE(j.low_statistics[0]);
  EXPECT_THROW(pnr::jitter_scan(pnr::SimConfig::parallel28(), {-1.0}, o), pnr::DomainError);
}

}  // namespace
