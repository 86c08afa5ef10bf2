#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pnr/confidence.hpp"
#include "pnr/errors.hpp"

namespace {

TEST(Confidence, SingleClickMatchesBayes) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 40);
  const auto s = pnr::thermal(0.2, 40);
  double q1 = 0.0;
  for (int m = 1; m <= 40; ++m) q1 += p(1, m) * s.at(m);
  EXPECT_NEAR(pnr::confidence_n(p, s, 1), p(1, 1) * s.at(1) / q1, 1e-14);
}

TEST(Confidence, IntrinsicWithUnitEfficiencyIsCertain) {
  const auto p = pnr::build_intrinsic(1.0, 30);
  const auto s = pnr::thermal(0.5, 30);
  for (int n = 1; n <= 3; ++n) EXPECT_NEAR(pnr::confidence_n(p, s, n), 1.0, 1e-14);
  EXPECT_NEAR(pnr::confidence_gt1(p, s), 1.0, 1e-14);
}

TEST(Confidence, AgreesWithMonteCarlo) {
  const double eta = 0.9, mu = 0.5;
  pnr::DetectorConfig d;
  d.eta = eta;
  const auto p = pnr::build_multiplexed(d, 40);
  const auto s = pnr::thermal_to_tolerance(mu);
  for (int n = 1; n <= 2; ++n) {
    const auto mc = oracle::mc_confidence_thermal(28, eta, mu, n, 2000000, 99 + n);
    EXPECT_NEAR(pnr::confidence_n(p, s, n), mc.value, 5.0 * mc.stderr_) << n;
  }
}

TEST(Confidence, GreaterThanOneUsesConditionedStatistics) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 40);
  const auto s = pnr::thermal(0.3, 40);
  const auto sp = pnr::renormalize_multiphoton(s);
  double lost = 0.0;
  for (int m = 2; m <= 40; ++m) lost += (p(0, m) + p(1, m)) * sp.at(m);
  EXPECT_NEAR(pnr::confidence_gt1(p, s), 1.0 - lost, 1e-14);
}

TEST(Confidence, UndefinedWhenNoClicksPossible) {
  const auto p = pnr::build_intrinsic(0.9, 10);
  EXPECT_THROW(pnr::confidence_n(p, pnr::PhotonStatistics::vacuum(10), 1), pnr::UndefinedConditionalError);
}

TEST(Confidence, ParallelArrayBeatsSplitterArray) {
  const auto grid = pnr::default_mu_grid();
  ASSERT_EQ(grid.size(), 50u);
  EXPECT_NEAR(grid.front(), 0.01, 1e-15);
  EXPECT_NEAR(grid.back(), 1.0, 1e-15);
  const auto curves = pnr::sweep_comparison(grid, 0.9, pnr::default_comparison_models(),
                                            pnr::ConfidenceMetric::C2);
  ASSERT_EQ(curves.size(), 3u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(curves[0].values[i], curves[1].values[i]);
    EXPECT_GT(curves[1].values[i], curves[2].values[i]);
  }
}

TEST(Confidence, SweepIndependentOfWorkers) {
  const auto grid = pnr::log_grid(0.01, 1.0, 17);
  const auto a = pnr::sweep_comparison(grid, 0.9, pnr::default_comparison_models(), pnr::ConfidenceMetric::C3, 1);
  const auto b = pnr::sweep_comparison(grid, 0.9, pnr::default_comparison_models(), pnr::ConfidenceMetric::C3, 4);
  std::ostringstream sa, sb;
  pnr::write_curves_csv(sa, a);
  pnr::write_curves_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Confidence, UndefinedPointsAreWritten) {
  const auto curves = pnr::sweep_comparison({0.0, 0.5}, 0.9, {pnr::ModelSpec::intrinsic()},
                                            pnr::ConfidenceMetric::C1);
  EXPECT_TRUE(std::isnan(curves[0].values[0]));
  EXPECT_FALSE(curves[0].errors[0].empty());
  std::ostringstream out;
  pnr::write_curves_csv(out, curves);
  EXPECT_NE(out.str().find("undefined"), std::string::npos);
}

TEST(Confidence, MetricParsing) {
  EXPECT_EQ(pnr::parse_metric("c_gt1"), pnr::ConfidenceMetric::CGreaterThan1);
  EXPECT_EQ(pnr::parse_metric("c2"), pnr::ConfidenceMetric::C2);
  EXPECT_THROW(pnr::parse_metric("c9"), pnr::Error);
}

}  // namespace
