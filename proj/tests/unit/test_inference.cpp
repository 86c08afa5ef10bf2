#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pnr/errors.hpp"
#include "pnr/inference.hpp"

namespace {

const pnr::ResponseMatrix& array28() {
  static const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 40);
  return p;
}

TEST(Inference, ForwardConservesProbability) {
  const auto q = pnr::forward(array28(), pnr::poisson(2.0, 40));
  double s = 0.0;
  for (double v : q.probs()) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(q[0], std::exp(-2.0 * 0.88), 1e-12);
}

TEST(Inference, ForwardColumnPolicy) {
  const auto s = pnr::poisson(1.0, 50);
  EXPECT_THROW(pnr::forward(array28(), s), pnr::Error);
  EXPECT_NO_THROW(pnr::forward(array28(), s, pnr::ColumnPolicy::Truncate));
}

TEST(Inference, TriangularInversionRecoversSource) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 28);
  const auto s = pnr::poisson(1.5, 28);
  const auto inv = pnr::invert_triangular(p, pnr::forward(p, s));
  for (int m = 0; m <= 12; ++m) EXPECT_NEAR(inv.s_hat.at(m), s.at(m), 1e-9) << m;
  EXPECT_LT(inv.clipped_mass, 1e-9);
}

TEST(Inference, SingularDiagonalIsReported) {
  const auto p = pnr::build_intrinsic(0.0, 4);
  EXPECT_THROW(pnr::invert_triangular(p, pnr::ClickStatistics::analytic({1, 0, 0, 0, 0})), pnr::NumericError);
}

TEST(Inference, GoldenSectionFindsMinimum) {
  const auto r = pnr::golden_section_minimize([](double x) { return (x - 1.234) * (x - 1.234); }, 0, 5, 1e-10, 200);
  EXPECT_NEAR(r.x, 1.234, 1e-8);
  // Two wells with the global one outside the final bracket.
  EXPECT_THROW(pnr::golden_section_minimize([](double x) { return std::cos(6 * x) + 0.1 * x; }, 0, 10, 1e-10, 200),
               pnr::ConvergenceError);
}

TEST(Inference, FitIsExactOnAnalyticInput) {
  for (double mu : {0.2, 1.0, 2.0, 5.0}) {
    const auto r = pnr::fit_poisson_mu(array28(), pnr::forward(array28(), pnr::poisson(mu, 40)));
    EXPECT_NEAR(r.mu_fit, mu, 1e-6) << mu;
    EXPECT_LT(r.forward_residual, 1e-12);
  }
}

TEST(Inference, SampledCountsPassChiSquare) {
  const auto q = pnr::forward(array28(), pnr::poisson(2.0, 40));
  const auto counts = pnr::sample_counts(q, 200000, 11);
  std::vector<double> probs(q.probs().begin(), q.probs().end());
  int dof = 0;
  const double chi = oracle::chi_square(counts, probs, &dof);
  ASSERT_GT(dof, 3);
  // Far beyond the 99.99th percentile for the handful of degrees of freedom.
  EXPECT_LT(chi, dof + 8.0 * std::sqrt(2.0 * dof));
  EXPECT_EQ(counts, pnr::sample_counts(q, 200000, 11));
  EXPECT_NE(counts, pnr::sample_counts(q, 200000, 12));
}

TEST(Inference, DeltaMethodSpreadMatchesRepeatedFits) {
  const auto q = pnr::forward(array28(), pnr::poisson(1.0, 40));
  const std::uint64_t shots = 20000;
  double sum = 0.0, sum2 = 0.0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    const auto c = pnr::sample_counts(q, shots, 3, static_cast<std::uint64_t>(i));
    const double mu = pnr::fit_poisson_mu(array28(), pnr::ClickStatistics::from_counts(c)).mu_fit;
    sum += mu;
    sum2 += mu * mu;
  }
  const double sd = std::sqrt(sum2 / reps - (sum / reps) * (sum / reps));
  EXPECT_NEAR(sd / pnr::mu_fit_stddev(array28(), 1.0, shots), 1.0, 0.2);
}

TEST(Inference, EmpiricalStatistics) {
  const std::vector<std::uint64_t> c = {5, 3, 2};
  const auto q = pnr::ClickStatistics::from_counts(c);
  EXPECT_EQ(q.sample_count(), 10u);
  EXPECT_DOUBLE_EQ(q[1], 0.3);
  EXPECT_DOUBLE_EQ(q.mean(), 0.7);
  const std::vector<std::uint64_t> none = {0, 0};
  EXPECT_THROW(pnr::ClickStatistics::from_counts(none), pnr::Error);
}

}  // namespace
