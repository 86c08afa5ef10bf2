#include "pnr/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "pixel_array.hpp"
#include "pnr/errors.hpp"
#include "pnr/parallel.hpp"
#include "pnr/rng.hpp"
#include "pnr/textio.hpp"

namespace pnr {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;

// RNG stream domains, so CW, pulsed and pump-probe runs never share draws.
constexpr std::uint64_t kCwDomain = 0x43570000;
constexpr std::uint64_t kPulsedDomain = 0x50554c00;
constexpr std::uint64_t kRecoveryDomain = 0x52454300;

std::uint64_t stream_id(std::uint64_t domain, std::uint64_t stream) { return mix64(domain) ^ stream; }

int assign_level(const std::vector<double>& ladder, double amplitude) {
  return static_cast<int>(std::upper_bound(ladder.begin(), ladder.end(), amplitude) - ladder.begin());
}

std::int64_t warmup_ps(const SimConfig& cfg) {
  return static_cast<std::int64_t>(std::llround(4.0 * std::max(cfg.recovery_tau_ns(), 1.0) * 1000.0 +
                                                cfg.rise_time_ps));
}

struct CwShard {
  std::uint64_t photons = 0;
  std::uint64_t photon_clicks = 0;
  std::uint64_t dark_clicks = 0;
  std::vector<EventRecord> events;
};

CwShard run_cw_shard(const SimConfig& cfg, double rate_per_ps, double dark_per_ps, std::int64_t begin,
                     std::int64_t end, bool keep_events, CounterRng rng) {
  CwShard out;
  detail::PixelArray array(cfg);
  const auto ladder = keep_events ? cfg.threshold_ladder() : std::vector<double>{};
  const double sigma_t = cfg.jitter_fwhm(1, 0.0) / kFwhmPerSigma;
  const auto pixels = static_cast<std::uint32_t>(cfg.detector.pixel_count);
  constexpr double kNoArrival = std::numeric_limits<double>::infinity();

  double t = static_cast<double>(begin - warmup_ps(cfg));
  double next_photon = rate_per_ps > 0.0 ? t + rng.exponential(rate_per_ps) : kNoArrival;
  double next_dark = dark_per_ps > 0.0 ? t + rng.exponential(dark_per_ps) : kNoArrival;

  auto record = [&](std::int64_t when, int photons) {
    EventRecord ev;
    ev.timestamp_ps = when + static_cast<std::int64_t>(std::llround(sigma_t * rng.normal()));
    ev.true_photons = photons;
    ev.clicks = 1;
    ev.amplitude = std::max(0.0, cfg.level_amplitude(1) + cfg.amplitude_noise_sigma * rng.normal());
    ev.assigned_n = assign_level(ladder, ev.amplitude);
    out.events.push_back(ev);
  };

  while (true) {
    const bool photon = next_photon <= next_dark;
    const double when = photon ? next_photon : next_dark;
    if (!(when < static_cast<double>(end))) break;
    const auto ti = static_cast<std::int64_t>(std::floor(when));
    const bool counted = ti >= begin;
    const int pixel = static_cast<int>(rng.below(pixels));
    const double u = rng.uniform();
    if (photon) {
      if (counted) ++out.photons;
      if (u < array.photon_probability(pixel, ti)) {
        array.click(pixel, ti);
        if (counted) {
          ++out.photon_clicks;
          if (keep_events) record(ti, 1);
        }
      }
      next_photon += rng.exponential(rate_per_ps);
    } else {
      if (u < array.dark_probability(pixel, ti)) {
        array.click(pixel, ti);
        if (counted) {
          ++out.dark_clicks;
          if (keep_events) record(ti, 0);
        }
      }
      next_dark += rng.exponential(dark_per_ps);
    }
  }
  return out;
}

}  // namespace

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
  out << "timestamp_ps,true_photons,clicks,amplitude,assigned_n\n";
  for (const auto& e : events) {
    out << e.timestamp_ps << ',' << e.true_photons << ',' << e.clicks << ','
        << textio::format_double(e.amplitude) << ',' << e.assigned_n << '\n';
  }
}

// ---------------------------------------------------------------------------
// CW

CwRun simulate_cw(const SimConfig& cfg, double photon_rate, double duration_s, bool keep_events,
                  std::uint64_t stream) {
  cfg.validate();
  if (!(photon_rate >= 0.0) || !std::isfinite(photon_rate)) {
    throw DomainError("simulate_cw: photon rate must be finite and >= 0");
  }
  CwRun run;
  run.summary.photon_rate = photon_rate;
  run.summary.duration_s = std::max(0.0, duration_s);
  const auto total_ps = static_cast<std::int64_t>(std::llround(std::max(0.0, duration_s) * 1e12));
  if (total_ps <= 0) return run;

  const double rate_per_ps = photon_rate * 1e-12;
  const double dark_per_ps = cfg.detector.dark_count_rate * 1e-12;
  std::int64_t shard_ps = total_ps;
  if (rate_per_ps > 0.0) {
    shard_ps = std::max<std::int64_t>(1'000'000, static_cast<std::int64_t>(
                                                     static_cast<double>(cfg.shard_photons) / rate_per_ps));
    shard_ps = std::min(shard_ps, total_ps);
  }
  const auto shards = static_cast<std::size_t>((total_ps + shard_ps - 1) / shard_ps);

  std::vector<CwShard> results(shards);
  const auto sid = stream_id(kCwDomain, stream);
  parallel_for(shards, cfg.workers, [&](std::size_t i) {
    const std::int64_t begin = static_cast<std::int64_t>(i) * shard_ps;
    const std::int64_t end = std::min(total_ps, begin + shard_ps);
    results[i] = run_cw_shard(cfg, rate_per_ps, dark_per_ps, begin, end, keep_events,
                              CounterRng(cfg.seed, sid, i));
  });

  auto& s = run.summary;
  for (auto& r : results) {
    s.photons += r.photons;
    s.photon_clicks += r.photon_clicks;
    s.dark_clicks += r.dark_clicks;
    if (keep_events) {
      run.events.insert(run.events.end(), r.events.begin(), r.events.end());
    }
  }
  // Jitter can swap neighbouring tags; report them in readout order.
  std::stable_sort(run.events.begin(), run.events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.timestamp_ps < b.timestamp_ps; });
  s.detected_rate = static_cast<double>(s.photon_clicks) / s.duration_s;
  s.dark_rate = static_cast<double>(s.dark_clicks) / s.duration_s;
  s.sde = s.photons ? static_cast<double>(s.photon_clicks) / static_cast<double>(s.photons) : 0.0;
  const double eta = cfg.detector.effective_eta();
  s.sde_over_eta = eta > 0.0 ? s.sde / eta : 0.0;
  return run;
}

void finalize_scan(RateScanResult& scan) {
  scan.max_sde = scan.sde.empty() ? 0.0 : *std::max_element(scan.sde.begin(), scan.sde.end());
  scan.normalized_sde.assign(scan.sde.size(), 0.0);
  if (scan.max_sde > 0.0) {
    for (std::size_t i = 0; i < scan.sde.size(); ++i) scan.normalized_sde[i] = scan.sde[i] / scan.max_sde;
  }
  scan.mcr = scan.detected_rate.empty() ? 0.0 : scan.detected_rate.back();
  scan.mcr_is_lower_bound = true;
  for (std::size_t i = 0; i < scan.normalized_sde.size(); ++i) {
    if (scan.normalized_sde[i] < kThreeDb) {
      if (i == 0) {
        scan.mcr = scan.detected_rate[0];
      } else {
        const double n0 = scan.normalized_sde[i - 1], n1 = scan.normalized_sde[i];
        const double d0 = scan.detected_rate[i - 1], d1 = scan.detected_rate[i];
        scan.mcr = d0 + (kThreeDb - n0) * (d1 - d0) / (n1 - n0);
      }
      scan.mcr_is_lower_bound = false;
      break;
    }
  }
}

RateScanResult rate_scan(const SimConfig& cfg, const std::vector<double>& input_rates,
                         const ScanOptions& options) {
  if (input_rates.empty()) throw DomainError("rate_scan: empty rate grid");
  for (std::size_t i = 0; i < input_rates.size(); ++i) {
    if (!(input_rates[i] > 0.0)) throw DomainError("rate_scan: rates must be > 0");
    if (i && !(input_rates[i] > input_rates[i - 1])) throw DomainError("rate_scan: grid must increase");
  }
  RateScanResult scan;
  for (std::size_t i = 0; i < input_rates.size(); ++i) {
    const double duration = options.photons_per_point / input_rates[i];
    auto run = simulate_cw(cfg, input_rates[i], duration, false, i);
    scan.input_rate.push_back(input_rates[i]);
    scan.detected_rate.push_back(run.summary.detected_rate);
    scan.sde.push_back(run.summary.sde);
  }
  finalize_scan(scan);
  return scan;
}

double nonparalyzable_detected_rate(double input_rate, double eta, double dead_time_s, int pixels) {
  const double x = input_rate * eta;
  return x / (1.0 + x * dead_time_s / pixels);
}

void write_scan_csv(std::ostream& out, const RateScanResult& scan) {
  out << "input_rate,detected_rate,sde,normalized_sde\n";
  for (std::size_t i = 0; i < scan.input_rate.size(); ++i) {
    out << textio::format_double(scan.input_rate[i]) << ',' << textio::format_double(scan.detected_rate[i])
        << ',' << textio::format_double(scan.sde[i]) << ',' << textio::format_double(scan.normalized_sde[i])
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Recovery

std::vector<RecoveryPoint> recovery_curve(const SimConfig& cfg, const std::vector<double>& delays_ns,
                                          std::uint64_t trials) {
  cfg.validate();
  if (trials == 0) throw DomainError("recovery_curve: trials must be > 0");
  const auto pixels = static_cast<std::uint32_t>(cfg.detector.pixel_count);
  const double reference = cfg.penalty(0);
  std::vector<RecoveryPoint> out(delays_ns.size());
  parallel_for(delays_ns.size(), cfg.workers, [&](std::size_t i) {
    const double delay = delays_ns[i];
    const double delay_ps = delay * 1000.0;
    CounterRng rng(cfg.seed, stream_id(kRecoveryDomain, 0), i);
    const bool loaded = delay_ps > cfg.rise_time_ps && delay < cfg.recovery_tau_ns();
    const double f = cfg.penalty(loaded ? 1 : 0);
    const double same_pixel = cfg.recovery_profile(delay);
    double acc = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto pump = rng.below(pixels);
      const auto probe = rng.below(pixels);
      acc += (pump == probe ? same_pixel : 1.0) * f;
    }
    out[i].delay_ns = delay;
    out[i].normalized_sde = reference > 0.0 ? acc / static_cast<double>(trials) / reference : 0.0;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Pulsed

double PulsedRun::assignment_probability(int clicks) const {
  if (clicks < 0 || clicks >= static_cast<int>(confusion.size())) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const auto& row = confusion[static_cast<std::size_t>(clicks)];
  const auto total = std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(row[static_cast<std::size_t>(clicks)]) / static_cast<double>(total);
}

namespace {

struct PulsedShard {
  std::vector<std::uint64_t> counts;
  std::vector<std::vector<std::uint64_t>> confusion;
  std::uint64_t saturated = 0;
  std::vector<EventRecord> events;
};

struct Arrival {
  std::int64_t t;
  bool dark;
};

}  // namespace

PulsedRun simulate_pulsed(const SimConfig& cfg, const PulsedOptions& o) {
  cfg.validate();
  if (o.shots < 1) throw DomainError("simulate_pulsed: shots must be >= 1");
  if (!(o.rep_rate_hz > 0.0)) throw DomainError("simulate_pulsed: repetition rate must be > 0");
  if (!(o.mu >= 0.0)) throw DomainError("simulate_pulsed: mu must be >= 0");
  if (!(o.pulse_width_ps >= 0.0)) throw DomainError("simulate_pulsed: pulse width must be >= 0");

  const int pixels = cfg.detector.pixel_count;
  const auto levels = static_cast<std::size_t>(pixels) + 1;
  const auto period_ps = static_cast<std::int64_t>(std::llround(1e12 / o.rep_rate_hz));
  const auto ladder = cfg.threshold_ladder();
  const double sigma_t = cfg.jitter_fwhm(1, 0.0) / kFwhmPerSigma;
  const double dark_window_ps = o.pulse_width_ps + cfg.rise_time_ps;
  const double dark_mean = cfg.detector.dark_count_rate * dark_window_ps * 1e-12;
  const auto rise = cfg.rise_time_ps;
  const auto warm_shots = static_cast<std::uint64_t>(
      std::ceil((cfg.recovery_tau_ns() * 1000.0 + rise) / static_cast<double>(period_ps))) + 1;

  const std::uint64_t shard_shots = cfg.shard_shots;
  const auto shards = static_cast<std::size_t>((o.shots + shard_shots - 1) / shard_shots);
  std::vector<PulsedShard> results(shards);
  const auto sid = stream_id(kPulsedDomain, o.stream);

  parallel_for(shards, cfg.workers, [&](std::size_t shard) {
    PulsedShard& out = results[shard];
    out.counts.assign(levels, 0);
    out.confusion.assign(levels, std::vector<std::uint64_t>(levels, 0));
    CounterRng rng(cfg.seed, sid, shard);
    detail::PixelArray array(cfg);
    const std::uint64_t first = static_cast<std::uint64_t>(shard) * shard_shots;
    const std::uint64_t last = std::min(o.shots, first + shard_shots);
    const std::uint64_t start = first >= warm_shots ? first - warm_shots : 0;

    std::vector<Arrival> arrivals;
    std::vector<std::int64_t> clicks;
    for (std::uint64_t s = start; s < last; ++s) {
      const bool counted = s >= first;
      const std::int64_t t0 = static_cast<std::int64_t>(s) * period_ps;
      const std::uint32_t m = rng.poisson(o.mu);
      const std::uint32_t dark = dark_mean > 0.0 ? rng.poisson(dark_mean) : 0;
      arrivals.clear();
      for (std::uint32_t i = 0; i < m; ++i) {
        arrivals.push_back({t0 + static_cast<std::int64_t>(std::floor(rng.uniform() * o.pulse_width_ps)), false});
      }
      for (std::uint32_t i = 0; i < dark; ++i) {
        arrivals.push_back({t0 + static_cast<std::int64_t>(std::floor(rng.uniform() * dark_window_ps)), true});
      }
      std::stable_sort(arrivals.begin(), arrivals.end(),
                       [](const Arrival& a, const Arrival& b) { return a.t < b.t; });

      clicks.clear();
      for (const auto& a : arrivals) {
        const int pixel = static_cast<int>(rng.below(static_cast<std::uint32_t>(pixels)));
        const double p = a.dark ? array.dark_probability(pixel, a.t) : array.photon_probability(pixel, a.t);
        if (rng.uniform() < p) {
          array.click(pixel, a.t);
          clicks.push_back(a.t + static_cast<std::int64_t>(std::llround(sigma_t * rng.normal())));
        }
      }
      std::sort(clicks.begin(), clicks.end());

      // Clusters: a click more than the rise time after the cluster's first
      // click opens a new amplitude event.
      int best_level = 0;
      double best_amplitude = 0.0;
      bool saturated = false;
      std::size_t i = 0;
      while (i < clicks.size()) {
        std::size_t j = i + 1;
        while (j < clicks.size() && static_cast<double>(clicks[j] - clicks[i]) <= rise) ++j;
        const int size = static_cast<int>(j - i);
        saturated = saturated || size > cfg.crosstalk_free_clicks;
        const double amplitude =
            std::max(0.0, cfg.level_amplitude(size) + cfg.amplitude_noise_sigma * rng.normal());
        const int level = assign_level(ladder, amplitude);
        if (amplitude > best_amplitude) best_amplitude = amplitude;
        best_level = std::max(best_level, level);
        i = j;
      }
      if (!counted) continue;

      const auto total_clicks = std::min<std::size_t>(clicks.size(), levels - 1);
      const auto assigned = std::min<std::size_t>(static_cast<std::size_t>(best_level), levels - 1);
      ++out.counts[assigned];
      ++out.confusion[total_clicks][assigned];
      if (saturated) ++out.saturated;
      if (o.keep_events) {
        EventRecord ev;
        ev.timestamp_ps = clicks.empty() ? t0 : clicks.front();
        ev.true_photons = static_cast<int>(m);
        ev.clicks = static_cast<int>(clicks.size());
        ev.amplitude = best_amplitude;
        ev.assigned_n = static_cast<int>(assigned);
        out.events.push_back(ev);
      }
    }
  });

  PulsedRun run;
  run.counts.assign(levels, 0);
  run.confusion.assign(levels, std::vector<std::uint64_t>(levels, 0));
  for (auto& r : results) {
    for (std::size_t n = 0; n < levels; ++n) {
      run.counts[n] += r.counts[n];
      for (std::size_t a = 0; a < levels; ++a) run.confusion[n][a] += r.confusion[n][a];
    }
    run.saturated_shots += r.saturated;
    if (o.keep_events) run.events.insert(run.events.end(), r.events.begin(), r.events.end());
  }
  run.q = ClickStatistics::from_counts(run.counts);
  return run;
}

// ---------------------------------------------------------------------------
// Four-detector aggregation

GcpsResult gcps_aggregate(const std::vector<SimConfig>& arms, double splitter_loss_db,
                          const std::vector<double>& connector_losses_db,
                          const std::vector<double>& input_rates, const ScanOptions& options) {
  if (arms.size() != 4) throw ConfigError("gcps_aggregate: exactly 4 detector configurations are required");
  if (input_rates.empty()) throw DomainError("gcps_aggregate: empty rate grid");
  double loss = splitter_loss_db;
  for (double c : connector_losses_db) {
    if (!(c >= 0.0)) throw ConfigError("gcps_aggregate: losses must be >= 0 dB");
    loss += c;
  }
  if (!(splitter_loss_db >= 0.0)) throw ConfigError("gcps_aggregate: losses must be >= 0 dB");

  GcpsResult result;
  result.transmission = std::pow(10.0, -loss / 10.0);
  double eta_sum = 0.0;
  for (const auto& a : arms) eta_sum += a.detector.effective_eta();
  result.ideal_max_sde = eta_sum / 4.0 * result.transmission;
  result.arms.resize(4);

  for (std::size_t i = 0; i < input_rates.size(); ++i) {
    const double rate = input_rates[i];
    if (!(rate > 0.0) || (i && !(rate > input_rates[i - 1]))) {
      throw DomainError("gcps_aggregate: rates must be > 0 and increasing");
    }
    const double arm_rate = rate * result.transmission / 4.0;
    const double duration = options.photons_per_point / arm_rate;
    std::uint64_t clicks = 0;
    double detected = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      auto run = simulate_cw(arms[a], arm_rate, duration, false, i * 4 + a);
      clicks += run.summary.photon_clicks;
      detected += run.summary.detected_rate;
      auto& arm = result.arms[a];
      arm.input_rate.push_back(arm_rate);
      arm.detected_rate.push_back(run.summary.detected_rate);
      arm.sde.push_back(run.summary.sde);
    }
    result.aggregate.input_rate.push_back(rate);
    result.aggregate.detected_rate.push_back(detected);
    result.aggregate.sde.push_back(static_cast<double>(clicks) / (rate * duration));
  }
  finalize_scan(result.aggregate);
  for (auto& arm : result.arms) finalize_scan(arm);
  return result;
}

}  // namespace pnr
