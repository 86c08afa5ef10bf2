#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pnr/config.hpp"
#include "pnr/inference.hpp"

namespace pnr {

/// One detection event as seen by the readout.
struct EventRecord {
  std::int64_t timestamp_ps = 0;
  int true_photons = 0;
  int clicks = 0;
  double amplitude = 0.0;  // units of the single-click amplitude
  int assigned_n = 0;      // level from the discriminator ladder

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Columns timestamp_ps,true_photons,clicks,amplitude,assigned_n.
void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events);

// ---------------------------------------------------------------------------
// CW illumination

struct CwSummary {
  double photon_rate = 0.0;  // photons/s at the detector input
  double duration_s = 0.0;
  std::uint64_t photons = 0;
  std::uint64_t photon_clicks = 0;
  std::uint64_t dark_clicks = 0;
  double detected_rate = 0.0;  // photon-induced clicks/s
  double dark_rate = 0.0;      // dark clicks/s
  double sde = 0.0;            // photon_clicks / photons
  double sde_over_eta = 0.0;   // sde / effective eta (statistically can exceed 1)
};

struct CwRun {
  CwSummary summary;
  std::vector<EventRecord> events;  // only filled when requested
};

/// Poisson photon arrivals, uniform routing to pixels, detection with
/// probability eta_eff * r(age) * f(k), independent dark counts. The run is
/// split into fixed time slices whose layout depends only on the inputs; each
/// slice draws from its own RNG stream and starts with a warm-up interval, so
/// results do not depend on the worker count.
CwRun simulate_cw(const SimConfig& cfg, double photon_rate, double duration_s,
                  bool keep_events = false, std::uint64_t stream = 0);

struct RateScanResult {
  std::vector<double> input_rate;      // photons/s
  std::vector<double> detected_rate;   // clicks/s
  std::vector<double> sde;             // absolute
  std::vector<double> normalized_sde;  // sde / max(sde over the scan)
  double max_sde = 0.0;
  double mcr = 0.0;  // detected rate at the 3 dB point
  bool mcr_is_lower_bound = false;
};

struct ScanOptions {
  double photons_per_point = 4e5;
};

/// 3 dB factor 10^(-0.3).
inline constexpr double kThreeDb = 0.50118723362727224;

/// simulate_cw at every input rate (grid must be non-empty and increasing).
RateScanResult rate_scan(const SimConfig& cfg, const std::vector<double>& input_rates,
                         const ScanOptions& options = {});

/// Fills normalized_sde, max_sde and the MCR from the raw columns.
void finalize_scan(RateScanResult& scan);

/// Analytic non-paralyzable curve r*eta / (1 + r*eta*tau/N).
double nonparalyzable_detected_rate(double input_rate, double eta, double dead_time_s, int pixels);

void write_scan_csv(std::ostream& out, const RateScanResult& scan);

// ---------------------------------------------------------------------------
// Recovery (pump-probe)

struct RecoveryPoint {
  double delay_ns = 0.0;
  double normalized_sde = 0.0;
};

/// Forces one click at t=0 on a random pixel, then probes a single photon at
/// each delay. The probe's detection probability is accumulated rather than
/// sampled, so the only randomness is which pixel each photon hits.
std::vector<RecoveryPoint> recovery_curve(const SimConfig& cfg, const std::vector<double>& delays_ns,
                                          std::uint64_t trials = 1000000);

// ---------------------------------------------------------------------------
// Pulsed illumination

struct PulsedRun {
  ClickStatistics q;                  // from assigned_n
  std::vector<std::uint64_t> counts;  // assigned_n histogram, length N+1
  /// confusion[c][a]: shots with c true clicks assigned to level a.
  std::vector<std::vector<std::uint64_t>> confusion;
  std::uint64_t saturated_shots = 0;  // shots with a cluster above the crosstalk-free range
  std::vector<EventRecord> events;    // one per shot, only when requested

  /// Pr(assigned_n == c | c clicks); NaN if no shot had c clicks.
  double assignment_probability(int clicks) const;
};

struct PulsedOptions {
  double rep_rate_hz = 40e6;
  double mu = 1.0;
  double pulse_width_ps = 33.0;
  std::uint64_t shots = 1000000;
  bool keep_events = false;
  std::uint64_t stream = 0;
};

/// Per shot: m ~ Poisson(mu) photons spread uniformly over the pulse width;
/// detected clicks within rise_time_ps of a cluster's first click merge into
/// one amplitude event; the shot is assigned the highest level among its
/// clusters.
PulsedRun simulate_pulsed(const SimConfig& cfg, const PulsedOptions& options);

// ---------------------------------------------------------------------------
// Amplitude discrimination

struct Plateau {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const noexcept { return 0.5 * (lo + hi); }
};

struct AmplitudeHistogram {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> counts;  // events with amplitude >= threshold
  std::vector<Plateau> plateaus;
  std::vector<double> assignment_thresholds;  // plateau midpoints
  /// Per click level c (index c), fraction of c-click events whose amplitude
  /// falls between the assignment thresholds bracketing level c. NaN for
  /// levels without events or with mean amplitude beyond the grid.
  std::vector<double> assignment_probability;
  /// Click levels with at least min_level_events events whose mean amplitude
  /// lies inside the threshold grid.
  int populated_levels = 0;
  bool overlap = false;          // fewer plateaus than populated levels
  double overlap_estimate = 0.0; // Gaussian misassignment estimate of the worst pair
};

struct PlateauOptions {
  double relative_change = 1e-3;  // max relative count change within a plateau
  double min_width = 0.2;         // in single-click amplitude units
  std::uint64_t min_level_events = 1;
};

AmplitudeHistogram amplitude_histogram(const std::vector<EventRecord>& events,
                                       const std::vector<double>& threshold_grid,
                                       double noise_sigma, const PlateauOptions& options = {});

/// Grid [lo, hi] with the given step.
std::vector<double> linear_grid(double lo, double hi, double step);

/// Two-sided Gaussian tail mass beyond half the level spacing:
/// erfc(0.5 / (sigma * sqrt 2)).
double gaussian_overlap(double sigma);

/// Voltage trace (single-click units) of an event: linear rise over
/// rise_time_ps, exponential decay with pulse_decay_ns.
std::vector<double> render_trace(const SimConfig& cfg, double amplitude, double t_start_ps,
                                 double t_stop_ps, double step_ps);

void write_staircase_csv(std::ostream& out, const AmplitudeHistogram& h);

// ---------------------------------------------------------------------------
// Timing jitter

struct JitterOptions {
  double pulsed_rep_rate_hz = 27e6;
  double pulsed_click_probability = 0.05;
  std::uint64_t samples = 400000;  // pulsed-laser clicks per rate point
  double bin_ps = 1.0;
  std::uint64_t min_samples = 20000;
};

struct JitterScanResult {
  std::vector<double> detected_rate;
  std::vector<double> fwhm_ps;
  std::vector<std::uint64_t> samples;
  std::vector<bool> low_statistics;
};

/// Pulsed-laser clicks superimposed on a Poisson background of detected CW
/// clicks at each rate. A pulsed click merged with background clicks inherits
/// the cluster's level and time tag; its timing error is Gaussian with the
/// level's FWHM broadened by the rate table.
JitterScanResult jitter_scan(const SimConfig& cfg, const std::vector<double>& detected_rates,
                             const JitterOptions& options = {});

/// FWHM of a sample set from a binned histogram (5-bin moving average, linear
/// interpolation at half maximum). Returns 0 when the peak is narrower than
/// one bin.
double histogram_fwhm(const std::vector<double>& samples, double bin_width);

void write_jitter_csv(std::ostream& out, const JitterScanResult& j);

// ---------------------------------------------------------------------------
// Four-detector aggregation

struct GcpsResult {
  RateScanResult aggregate;
  std::vector<RateScanResult> arms;
  double transmission = 1.0;  // 10^(-total loss / 10)
  double ideal_max_sde = 0.0; // mean(arm eta_eff) * transmission
};

/// Input flux attenuated by the total loss, split evenly over exactly four
/// arms, each simulated independently; detected rates summed.
GcpsResult gcps_aggregate(const std::vector<SimConfig>& arms, double splitter_loss_db,
                          const std::vector<double>& connector_losses_db,
                          const std::vector<double>& input_rates, const ScanOptions& options = {});

}  // namespace pnr
