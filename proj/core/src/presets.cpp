#include "pnr/calibration.hpp"
#include "pnr/config.hpp"

namespace pnr {

namespace {

// Penalty slopes from calibrate_penalty with the shipped rate grids; rerun
// `pnrsim calibrate` after changing the recovery profile or the grids.
constexpr double kParallel28Slope = 0.369140625;
constexpr double kGcpsArmSlope = 0.232421875;

SimConfig parallel_base() {
  SimConfig c;
  c.detector.pixel_count = 28;
  c.detector.eta = 0.88;
  c.detector.dark_count_rate = 60.0;
  c.recovery_profile = Table1D({0.0, 1.0, 5.0, 15.0}, {0.0, 0.0, 0.1, 1.0});
  c.jitter_fwhm_ps = {43.0, 38.0, 34.0, 31.0, 29.0, 27.0, 26.0, 25.0};
  c.jitter_rate_broadening = Table1D({0.0, 50.0, 100.0, 200.0, 400.0}, {0.0, 20.0, 38.0, 62.0, 110.0});
  return c;
}

}  // namespace

SimConfig SimConfig::parallel28() {
  SimConfig c = parallel_base();
  c.redistribution_penalty = penalty_table(28, anchor_penalty(c, 5.0, 0.96), kParallel28Slope);
  return c;
}

SimConfig SimConfig::gcps_arm() {
  SimConfig c = parallel_base();
  c.redistribution_penalty = penalty_table(28, anchor_penalty(c, 5.0, 0.96), kGcpsArmSlope);
  return c;
}

SimConfig SimConfig::single_pixel() {
  SimConfig c;
  c.detector.pixel_count = 1;
  c.detector.eta = 0.88;
  c.detector.dark_count_rate = 60.0;
  c.recovery_profile = Table1D({0.0, 25.0, 25.0}, {0.0, 0.0, 1.0});
  c.redistribution_penalty = {1.0};
  c.crosstalk_free_clicks = 1;
  c.jitter_fwhm_ps = {34.0};
  c.jitter_rate_broadening = Table1D({0.0, 15.0, 30.0}, {0.0, 62.0, 90.0});
  return c;
}

}  // namespace pnr
