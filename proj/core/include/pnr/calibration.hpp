#pragma once

#include <vector>

#include "pnr/config.hpp"
#include "pnr/mcsim.hpp"

namespace pnr {

/// f(0) = 1, f(k) = f1 / (1 + slope*(k-1)) for k = 1..pixels. The detected
/// rate stays monotone in the input rate for any slope >= 0.
std::vector<double> penalty_table(int pixels, double f1, double slope);

/// f1 such that a probe `delay` after a single-pixel pump sees the array at
/// `target` of its idle efficiency: target*N / ((N-1) + r(delay)).
double anchor_penalty(const SimConfig& cfg, double delay_ns, double target);

struct CalibrationOptions {
  double target_mcr = 250e6;  // clicks/s
  std::vector<double> input_rates;
  ScanOptions scan;
  double slope_hi = 1.0;
  double relative_tolerance = 2e-3;
  int max_iterations = 40;
};

struct CalibrationResult {
  double f1 = 1.0;
  double slope = 0.0;
  double mcr = 0.0;
  int iterations = 0;
  std::vector<double> table;
};

/// Bisects the slope (f1 held fixed) until the simulated MCR matches the
/// target. Every trial reuses the configured seed, so the MC noise is common
/// to all trials. Throws ConvergenceError if the target is outside
/// [MCR(slope_hi), MCR(0)].
CalibrationResult calibrate_penalty(SimConfig cfg, double f1, const CalibrationOptions& options);

/// Log-spaced input-rate grid, `per_decade` points per decade.
std::vector<double> rate_grid(double lo, double hi, int per_decade);

}  // namespace pnr
