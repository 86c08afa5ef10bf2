#include <algorithm>
#include <cmath>
#include <ostream>

#include "pnr/errors.hpp"
#include "pnr/mcsim.hpp"
#include "pnr/parallel.hpp"
#include "pnr/rng.hpp"
#include "pnr/textio.hpp"

namespace pnr {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;
constexpr std::uint64_t kJitterDomain = 0x4a495400;
// Background window before the pulsed click, in rise times. Clusters longer
// than this are vanishingly rare at any rate the array sustains.
constexpr double kLookback = 10.0;

}  // namespace

double histogram_fwhm(const std::vector<double>& samples, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("histogram_fwhm: bin width must be > 0");
  if (samples.empty()) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = std::floor(*lo_it / bin_width) * bin_width;
  if (*hi_it - *lo_it < bin_width) return 0.0;

  // Two guard bins each side so the moving average sees zeros past the data.
  const auto bins = static_cast<std::size_t>(std::floor((*hi_it - lo) / bin_width)) + 5;
  std::vector<double> h(bins, 0.0);
  for (double s : samples) {
    const auto b = static_cast<std::size_t>(std::floor((s - lo) / bin_width)) + 2;
    h[std::min(b, bins - 1)] += 1.0;
  }
  std::vector<double> sm(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    double acc = 0.0;
    for (std::size_t k = (i >= 2 ? i - 2 : 0); k <= std::min(bins - 1, i + 2); ++k) acc += h[k];
    sm[i] = acc / 5.0;
  }
  const auto peak = static_cast<std::size_t>(std::max_element(sm.begin(), sm.end()) - sm.begin());
  const double half = 0.5 * sm[peak];

  std::size_t l = peak;
  while (l > 0 && sm[l - 1] >= half) --l;
  std::size_t r = peak;
  while (r + 1 < bins && sm[r + 1] >= half) ++r;
  // Linear interpolation between the last bin above and the first below.
  double left = static_cast<double>(l);
  if (l > 0) left -= (sm[l] - half) / (sm[l] - sm[l - 1]);
  double right = static_cast<double>(r);
  if (r + 1 < bins) right += (sm[r] - half) / (sm[r] - sm[r + 1]);
  return (right - left) * bin_width;
}

JitterScanResult jitter_scan(const SimConfig& cfg, const std::vector<double>& detected_rates,
                             const JitterOptions& o) {
  cfg.validate();
  if (detected_rates.empty()) throw DomainError("jitter_scan: empty rate grid");
  for (double d : detected_rates) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("jitter_scan: rates must be finite and >= 0");
  }
  if (!(o.bin_ps > 0.0)) throw DomainError("jitter_scan: bin width must be > 0");

  const double rise = cfg.rise_time_ps;
  const double window = (kLookback + 1.0) * rise;
  JitterScanResult result;
  result.detected_rate = detected_rates;
  result.fwhm_ps.assign(detected_rates.size(), 0.0);
  result.samples.assign(detected_rates.size(), o.samples);
  result.low_statistics.assign(detected_rates.size(), o.samples < o.min_samples);

  parallel_for(detected_rates.size(), cfg.workers, [&](std::size_t p) {
    const double rate = detected_rates[p];
    CounterRng rng(cfg.seed, mix64(kJitterDomain), p);
    const double bg_mean = rate * window * 1e-12;
    std::vector<double> errors;
    errors.reserve(o.samples);
    std::vector<double> times;
    for (std::uint64_t s = 0; s < o.samples; ++s) {
      // Pulsed click at t = 0; background spans [-kLookback*rise, rise).
      times.clear();
      const std::uint32_t k = bg_mean > 0.0 ? rng.poisson(bg_mean) : 0;
      for (std::uint32_t i = 0; i < k; ++i) times.push_back(rng.uniform() * window - kLookback * rise);
      times.push_back(0.0);
      std::sort(times.begin(), times.end());

      double cluster_start = 0.0;
      int level = 1;
      for (std::size_t i = 0; i < times.size();) {
        std::size_t j = i + 1;
        while (j < times.size() && times[j] - times[i] <= rise) ++j;
        if (times[i] <= 0.0 && times[j - 1] >= 0.0) {
          cluster_start = times[i];
          level = static_cast<int>(j - i);
          break;
        }
        i = j;
      }
      const double sigma = cfg.jitter_fwhm(level, rate) / kFwhmPerSigma;
      errors.push_back(cluster_start + sigma * rng.normal());
    }
    result.fwhm_ps[p] = histogram_fwhm(errors, o.bin_ps);
  });
  return result;
}

void write_jitter_csv(std::ostream& out, const JitterScanResult& j) {
  out << "detected_rate,fwhm_ps,samples,low_statistics\n";
  for (std::size_t i = 0; i < j.detected_rate.size(); ++i) {
    out << textio::format_double(j.detected_rate[i]) << ',' << textio::format_double(j.fwhm_ps[i]) << ','
        << j.samples[i] << ',' << (j.low_statistics[i] ? 1 : 0) << '\n';
  }
}

}  // namespace pnr
