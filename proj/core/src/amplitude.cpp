#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pnr/errors.hpp"
#include "pnr/mcsim.hpp"
#include "pnr/textio.hpp"

namespace pnr {

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("linear_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

double gaussian_overlap(double sigma) {
  if (!(sigma > 0.0)) return 0.0;
  return std::erfc(0.5 / (sigma * std::sqrt(2.0)));
}

AmplitudeHistogram amplitude_histogram(const std::vector<EventRecord>& events,
                                       const std::vector<double>& threshold_grid, double noise_sigma,
                                       const PlateauOptions& opts) {
  if (threshold_grid.size() < 2) throw DomainError("amplitude_histogram: need at least two thresholds");
  for (std::size_t i = 1; i < threshold_grid.size(); ++i) {
    if (!(threshold_grid[i] > threshold_grid[i - 1])) {
      throw DomainError("amplitude_histogram: threshold grid must increase");
    }
  }

  // Shots without a click produce no trace.
  std::vector<double> amps;
  int max_clicks = 0;
  for (const auto& e : events) {
    if (e.clicks <= 0) continue;
    amps.push_back(e.amplitude);
    max_clicks = std::max(max_clicks, e.clicks);
  }
  std::sort(amps.begin(), amps.end());

  AmplitudeHistogram h;
  h.thresholds = threshold_grid;
  h.counts.resize(threshold_grid.size());
  for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
    const auto it = std::lower_bound(amps.begin(), amps.end(), threshold_grid[i]);
    h.counts[i] = static_cast<std::uint64_t>(amps.end() - it);
  }

  std::vector<std::uint64_t> per_level(static_cast<std::size_t>(max_clicks) + 1, 0);
  std::vector<double> level_sum(per_level.size(), 0.0);
  for (const auto& e : events) {
    if (e.clicks <= 0) continue;
    ++per_level[static_cast<std::size_t>(e.clicks)];
    level_sum[static_cast<std::size_t>(e.clicks)] += e.amplitude;
  }
  // Levels whose mean amplitude lies beyond the grid cannot form a plateau.
  for (std::size_t c = 1; c < per_level.size(); ++c) {
    if (per_level[c] >= std::max<std::uint64_t>(opts.min_level_events, 1) &&
        level_sum[c] / static_cast<double>(per_level[c]) < threshold_grid.back()) {
      ++h.populated_levels;
    }
  }

  // Greedy left-to-right scan for flat runs of non-zero count.
  const std::size_t n = threshold_grid.size();
  std::size_t i = 0;
  while (i < n) {
    if (h.counts[i] == 0) {
      ++i;
      continue;
    }
    const double base = static_cast<double>(h.counts[i]);
    std::size_t j = i;
    while (j + 1 < n && base - static_cast<double>(h.counts[j + 1]) < opts.relative_change * base) ++j;
    if (threshold_grid[j] - threshold_grid[i] >= opts.min_width) {
      h.plateaus.push_back({threshold_grid[i], threshold_grid[j]});
      h.assignment_thresholds.push_back(h.plateaus.back().midpoint());
    }
    i = j + 1;
  }
  h.overlap = static_cast<int>(h.plateaus.size()) < h.populated_levels;
  h.overlap_estimate = gaussian_overlap(noise_sigma);

  // Level c sits between threshold c-1 and c; missing thresholds fall back
  // to the nominal half-integer positions.
  auto bound = [&](int k) {
    if (k < 0) return -std::numeric_limits<double>::infinity();
    if (k < static_cast<int>(h.assignment_thresholds.size())) {
      return h.assignment_thresholds[static_cast<std::size_t>(k)];
    }
    return k + 0.5;
  };
  h.assignment_probability.assign(per_level.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint64_t> hits(per_level.size(), 0);
  for (const auto& e : events) {
    if (e.clicks <= 0) continue;
    if (e.amplitude >= bound(e.clicks - 1) && e.amplitude < bound(e.clicks)) {
      ++hits[static_cast<std::size_t>(e.clicks)];
    }
  }
  for (std::size_t c = 1; c < per_level.size(); ++c) {
    if (per_level[c] && level_sum[c] / static_cast<double>(per_level[c]) < threshold_grid.back()) {
      h.assignment_probability[c] = static_cast<double>(hits[c]) / static_cast<double>(per_level[c]);
    }
  }
  return h;
}

std::vector<double> render_trace(const SimConfig& cfg, double amplitude, double t_start_ps,
                                 double t_stop_ps, double step_ps) {
  const auto grid = linear_grid(t_start_ps, t_stop_ps, step_ps);
  const double rise = cfg.rise_time_ps;
  const double decay_ps = cfg.pulse_decay_ns * 1000.0;
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < 0.0) continue;
    if (t < rise) {
      v[i] = amplitude * t / rise;
    } else {
      v[i] = decay_ps > 0.0 ? amplitude * std::exp(-(t - rise) / decay_ps) : 0.0;
    }
  }
  return v;
}

void write_staircase_csv(std::ostream& out, const AmplitudeHistogram& h) {
  out << "threshold,count,plateau\n";
  for (std::size_t i = 0; i < h.thresholds.size(); ++i) {
    int plateau = -1;
    for (std::size_t p = 0; p < h.plateaus.size(); ++p) {
      if (h.thresholds[i] >= h.plateaus[p].lo && h.thresholds[i] <= h.plateaus[p].hi) {
        plateau = static_cast<int>(p);
        break;
      }
    }
    out << textio::format_double(h.thresholds[i]) << ',' << h.counts[i] << ',' << plateau << '\n';
  }
}

}  // namespace pnr
