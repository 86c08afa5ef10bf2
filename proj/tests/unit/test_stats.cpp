#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pnr/errors.hpp"
#include "pnr/stats.hpp"

namespace {

TEST(Stats, PoissonMatchesPmfAndSumsToOne) {
  const auto s = pnr::poisson(2.0, 30);
  double sum = 0.0;
  for (double p : s.probs()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  EXPECT_NEAR(s[3], std::exp(-2.0) * 8.0 / 6.0, 1e-12);
  EXPECT_NEAR(pnr::mean(s), 2.0, 1e-9);
  EXPECT_GT(s.tail_mass(), 0.0);
  EXPECT_LT(s.tail_mass(), 1e-15);
}

TEST(Stats, ThermalIsGeometric) {
  const double mu = 0.5;
  const auto s = pnr::thermal_to_tolerance(mu);
  for (int m = 0; m < 5; ++m) {
    EXPECT_NEAR(s.at(m), std::pow(mu, m) / std::pow(1.0 + mu, m + 1), 1e-14) << m;
  }
  EXPECT_LT(s.tail_mass(), 1e-12);
  EXPECT_NEAR(pnr::mean(s), mu, 1e-10);
}

TEST(Stats, DefaultTruncation) {
  EXPECT_EQ(pnr::default_truncation(0.0), 20);
  EXPECT_EQ(pnr::default_truncation(2.0), 28);
  EXPECT_EQ(pnr::default_truncation(2.1), 29);
  EXPECT_EQ(pnr::poisson(2.0).m_max(), 28);
}

TEST(Stats, ZeroMeanIsVacuum) {
  const auto s = pnr::poisson(0.0, 5);
  EXPECT_EQ(s[0], 1.0);
  for (int m = 1; m <= 5; ++m) EXPECT_EQ(s[static_cast<std::size_t>(m)], 0.0);
}

TEST(Stats, RejectsBadInput) {
  EXPECT_THROW(pnr::poisson(-1.0, 5), pnr::DomainError);
  EXPECT_THROW(pnr::thermal(std::nan(""), 5), pnr::DomainError);
  EXPECT_THROW(pnr::PhotonStatistics::custom({0.5, 0.2}), pnr::Error);
  EXPECT_THROW(pnr::PhotonStatistics::custom({1.2, -0.2}), pnr::Error);
}

TEST(Stats, MultiphotonRenormalization) {
  const auto s = pnr::thermal(0.3, 40);
  const auto r = pnr::renormalize_multiphoton(s);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.0);
  double z = 0.0;
  for (int m = 2; m <= 40; ++m) z += s.at(m);
  EXPECT_NEAR(r.at(3), s.at(3) / z, 1e-14);
  double sum = 0.0;
  for (double p : r.probs()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  EXPECT_THROW(pnr::renormalize_multiphoton(pnr::PhotonStatistics::vacuum(3)), pnr::DegenerateInputError);
}

TEST(Stats, TotalVariationPadsWithZeros) {
  const std::vector<double> a = {0.5, 0.5};
  const std::vector<double> b = {0.5, 0.25, 0.25};
  EXPECT_NEAR(pnr::total_variation(a, b), 0.25, 1e-15);
}

TEST(Stats, TextRoundTrip) {
  const auto s = pnr::poisson(1.7, 25);
  std::stringstream io;
  pnr::write_statistics(io, s);
  const auto back = pnr::read_statistics(io);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t m = 0; m < s.size(); ++m) EXPECT_EQ(back[m], s[m]);
  EXPECT_EQ(back.mu(), s.mu());
}

}  // namespace
