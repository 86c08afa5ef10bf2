#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnr/pmatrix.hpp"

namespace pnr {

/// Flat "section.key = value" store read from INI-like text:
///
///     # comment
///     [detector]
///     eta = 0.88
///
/// Keys are kept sorted so the serialized snapshot is deterministic.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, std::string_view source = "<config>");
  static ConfigFile load(const std::string& path);

  /// "section.key=value" override; the section must be present in the key.
  void apply_override(std::string_view assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Piecewise-linear table, clamped at both ends. Repeated x values encode a
/// step: the value left of the step applies strictly before it.
class Table1D {
 public:
  Table1D() = default;
  Table1D(std::vector<double> x, std::vector<double> y);
  /// "x:y, x:y, ..."
  static Table1D parse(std::string_view text, std::string_view what);

  double operator()(double x) const noexcept;
  bool empty() const noexcept { return x_.empty(); }
  const std::vector<double>& xs() const noexcept { return x_; }
  const std::vector<double>& ys() const noexcept { return y_; }
  std::string to_text() const;

 private:
  std::vector<double> x_, y_;
};

/// Everything the event-level simulator needs.
struct SimConfig {
  DetectorConfig detector;

  /// Per-pixel efficiency (0..1) vs time since that pixel's last click, in ns.
  Table1D recovery_profile;
  /// Array-efficiency multiplier f(k), k = number of pixels currently
  /// recovering (clicked more than rise_time_ps and less than
  /// recovery_tau_ns() ago). Entry k applies for k >= size()-1 if short.
  std::vector<double> redistribution_penalty;

  double rise_time_ps = 300.0;
  double pulse_decay_ns = 20.0;
  /// Additive Gaussian amplitude noise, in units of the single-click amplitude.
  double amplitude_noise_sigma = 0.03;
  int crosstalk_free_clicks = 8;
  /// Amplitude increment per click beyond crosstalk_free_clicks.
  double saturation_slope = 0.5;
  /// Optional discriminator ladder; empty means midpoints between levels.
  std::vector<double> thresholds;

  /// FWHM per click level (index 0 = 1-click level), ps.
  std::vector<double> jitter_fwhm_ps;
  /// Extra FWHM (ps) vs detection rate (Mcps), added in quadrature.
  Table1D jitter_rate_broadening;

  std::uint64_t seed = 1;
  int workers = 0;
  /// Target photons per CW shard (sets the time-slice length).
  std::uint64_t shard_photons = 1u << 16;
  /// Shots per pulsed-mode shard.
  std::uint64_t shard_shots = 1u << 15;

  /// Time (ns) at which a pixel is fully recovered.
  double recovery_tau_ns() const;
  /// Longest interval (ns) after a click with zero efficiency.
  double dead_time_ns() const;
  double penalty(int recovering) const noexcept;
  /// Level amplitude for n simultaneous clicks (noise-free).
  double level_amplitude(int clicks) const noexcept;
  /// Discriminator thresholds for levels 1..N.
  std::vector<double> threshold_ladder() const;
  double jitter_fwhm(int level, double detected_rate_hz) const noexcept;

  void validate() const;

  /// Calibrated 28-pixel parallel array (matches configs/parallel28.cfg).
  static SimConfig parallel28();
  /// Conventional single-pixel detector (matches configs/single_pixel.cfg).
  static SimConfig single_pixel();
  /// One arm of the four-detector setup (matches configs/gcps_arm.cfg).
  static SimConfig gcps_arm();
};

SimConfig sim_config_from(const ConfigFile& file);
/// Starts from `base` and applies every key present in `file`.
SimConfig sim_config_from(const ConfigFile& file, SimConfig base);
ConfigFile to_config_file(const SimConfig& cfg);

SimConfig load_sim_config(const std::string& path);

}  // namespace pnr
