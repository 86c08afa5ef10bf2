#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pnr/errors.hpp"
#include "pnr/pmatrix.hpp"

namespace {

TEST(Pmatrix, DiagonalOfDefaultArray) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 20);
  EXPECT_NEAR(p(1, 1), 0.88, 1e-12);
  EXPECT_NEAR(p(2, 2), 0.88 * 0.88 * 27.0 / 28.0, 1e-12);
  EXPECT_NEAR(p(3, 3), 0.88 * 0.88 * 0.88 * 27.0 * 26.0 / (28.0 * 28.0), 1e-12);
  for (int n = 0; n <= 20; ++n) {
    EXPECT_NEAR(p(n, n), pnr::multiplexed_diagonal(28, 0.88, n), 1e-12) << n;
  }
}

TEST(Pmatrix, MatchesEnumerationForSmallArrays) {
  for (int pixels : {1, 2, 3, 5}) {
    for (double eta : {0.0, 0.3, 0.88, 1.0}) {
      pnr::DetectorConfig d;
      d.pixel_count = pixels;
      d.eta = eta;
      const auto p = pnr::build_multiplexed(d, 5);
      for (int m = 0; m <= 5; ++m) {
        for (int n = 0; n <= p.n_max(); ++n) {
          EXPECT_NEAR(p.at(n, m), oracle::enumerate_pnm(pixels, eta, n, m), 1e-12)
              << "N=" << pixels << " eta=" << eta << " n=" << n << " m=" << m;
        }
      }
    }
  }
}

TEST(Pmatrix, MatchesStirlingClosedFormAt28Pixels) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 40);
  for (int m = 0; m <= 40; m += 3) {
    for (int n = 0; n <= std::min(m, 28); ++n) {
      EXPECT_NEAR(p(n, m), oracle::stirling_pnm(28, 0.88, n, m), 1e-11) << n << "," << m;
    }
  }
}

TEST(Pmatrix, ColumnsSumToOneAndUpperTriangular) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 60);
  EXPECT_EQ(p.n_max(), 28);
  for (int m = 0; m <= 60; ++m) {
    double s = 0.0;
    for (int n = 0; n <= p.n_max(); ++n) {
      EXPECT_GE(p(n, m), 0.0);
      if (n > m) EXPECT_EQ(p(n, m), 0.0);
      s += p(n, m);
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << m;
  }
}

TEST(Pmatrix, OccupancyRecurrenceAgreesWithInclusionExclusion) {
  for (int pixels = 1; pixels <= 8; ++pixels) {
    for (int k = 0; k <= 12; ++k) {
      const auto a = pnr::occupancy_distribution(k, pixels);
      const auto b = pnr::occupancy_inclusion_exclusion(k, pixels);
      for (int n = 0; n <= pixels; ++n) EXPECT_NEAR(a[n], b[n], 1e-12);
    }
  }
}

TEST(Pmatrix, IntrinsicIsBinomial) {
  const auto p = pnr::build_intrinsic(0.9, 10);
  EXPECT_NEAR(p(2, 4), 6.0 * 0.81 * 0.01, 1e-14);
  const auto id = pnr::build_intrinsic(1.0, 6);
  for (int n = 0; n <= 6; ++n) {
    for (int m = 0; m <= 6; ++m) EXPECT_EQ(id(n, m), n == m ? 1.0 : 0.0);
  }
}

TEST(Pmatrix, BsArrayIncludesSplitterLoss) {
  const auto p = pnr::build_bs_array(8, 0.9, 0.3, 10);
  EXPECT_EQ(p.model(), pnr::ModelTag::BSArray);
  EXPECT_NEAR(p(1, 1), 0.9 * std::pow(10.0, -0.03), 1e-12);
  EXPECT_NEAR(p(1, 1), 0.840, 5e-4);
  EXPECT_EQ(p.n_max(), 8);
}

TEST(Pmatrix, Validation) {
  pnr::DetectorConfig d;
  d.eta = 1.5;
  EXPECT_THROW(pnr::build_multiplexed(d, 5), pnr::ConfigError);
  d.eta = 0.5;
  d.pixel_count = 0;
  EXPECT_THROW(pnr::build_multiplexed(d, 5), pnr::ConfigError);
  EXPECT_THROW(pnr::build_multiplexed(pnr::DetectorConfig{}, 40, 29), pnr::ConfigError);
}

TEST(Pmatrix, CsvRoundTripIsExact) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 12);
  std::stringstream io;
  pnr::write_matrix_csv(io, p);
  const auto back = pnr::read_matrix_csv(io, pnr::ModelTag::Multiplexed);
  ASSERT_EQ(back.n_max(), p.n_max());
  ASSERT_EQ(back.m_max(), p.m_max());
  for (int n = 0; n <= p.n_max(); ++n) {
    for (int m = 0; m <= p.m_max(); ++m) EXPECT_EQ(back(n, m), p(n, m));
  }
}

}  // namespace
