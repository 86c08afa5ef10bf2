#include "pnr/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "pnr/errors.hpp"

namespace pnr {

std::vector<double> penalty_table(int pixels, double f1, double slope) {
  if (pixels < 1) throw ConfigError("penalty_table: pixels must be >= 1");
  if (!(f1 > 0.0 && f1 <= 1.0)) throw ConfigError("penalty_table: f1 must lie in (0,1]");
  if (!(slope >= 0.0)) throw ConfigError("penalty_table: slope must be >= 0");
  std::vector<double> t(static_cast<std::size_t>(pixels) + 1);
  t[0] = 1.0;
  for (int k = 1; k <= pixels; ++k) t[static_cast<std::size_t>(k)] = f1 / (1.0 + slope * (k - 1));
  return t;
}

double anchor_penalty(const SimConfig& cfg, double delay_ns, double target) {
  const double n = cfg.detector.pixel_count;
  return std::min(1.0, target * n / ((n - 1.0) + cfg.recovery_profile(delay_ns)));
}

std::vector<double> rate_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) throw DomainError("rate_grid: need 0 < lo < hi");
  const int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return g;
}

CalibrationResult calibrate_penalty(SimConfig cfg, double f1, const CalibrationOptions& o) {
  if (!(o.target_mcr > 0.0)) throw ConfigError("calibrate_penalty: target MCR must be > 0");
  if (o.input_rates.empty()) throw ConfigError("calibrate_penalty: empty rate grid");
  const int pixels = cfg.detector.pixel_count;
  auto mcr_at = [&](double slope) {
    cfg.redistribution_penalty = penalty_table(pixels, f1, slope);
    return rate_scan(cfg, o.input_rates, o.scan).mcr;
  };

  double lo = 0.0, hi = o.slope_hi;
  double m_lo = mcr_at(lo);
  double m_hi = mcr_at(hi);
  if (!(m_lo >= o.target_mcr && m_hi <= o.target_mcr)) {
    throw ConvergenceError("calibrate_penalty: target MCR not bracketed by the slope range",
                           m_lo < o.target_mcr ? lo : hi, m_lo < o.target_mcr ? m_lo : m_hi);
  }
  CalibrationResult r;
  r.f1 = f1;
  for (r.iterations = 1; r.iterations <= o.max_iterations; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    const double m = mcr_at(mid);
    r.slope = mid;
    r.mcr = m;
    if (std::abs(m - o.target_mcr) <= o.relative_tolerance * o.target_mcr) break;
    if (m > o.target_mcr) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (r.iterations > o.max_iterations) {
    throw ConvergenceError("calibrate_penalty: iteration limit reached", r.slope, r.mcr);
  }
  r.table = penalty_table(pixels, f1, r.slope);
  return r;
}

}  // namespace pnr
