#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pnr/config.hpp"

namespace pnr {

struct OracleResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelfTestOptions {
  bool quick = false;
  /// Configuration whose redistribution table is checked.
  SimConfig config = SimConfig::parallel28();
};

struct SelfTestReport {
  std::vector<OracleResult> results;
  bool passed() const;
};

/// Oracle suite: brute-force P equivalence, column sums, occupancy
/// cross-check, diagonal formula, analytic round trips, dead-time analytic
/// match, redistribution-table consistency and worker-count determinism.
SelfTestReport run_selftest(const SelfTestOptions& options);

/// Checks the penalty table of `cfg`: f(0) = 1, entries in (0,1] and
/// non-increasing, entries on one f1/(1 + c(k-1)) curve, and (for arrays) the
/// single-click recovery anchor 0.96 +- 0.005 at 5 ns. Empty string if fine.
std::string check_redistribution_table(const SimConfig& cfg);

/// Brute-force P_nm for small N and m: every photon is lost or lands on one
/// of the pixels, (N+1)^m outcomes.
double brute_force_pnm(int pixels, double eta, int n, int m);

void write_report(std::ostream& out, const SelfTestReport& report);

}  // namespace pnr
