#include "pnr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "pnr/errors.hpp"
#include "pnr/textio.hpp"

namespace pnr {

// ---------------------------------------------------------------------------
// ConfigFile

ConfigFile ConfigFile::parse(std::istream& in, std::string_view source) {
  ConfigFile file;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = line;
    if (auto hash = view.find('#'); hash != std::string::npos) view.erase(hash);
    auto body = textio::trim(view);
    if (body.empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where() + ": unterminated section header");
      section = std::string(textio::trim(body.substr(1, body.size() - 2)));
      if (section.empty()) throw ConfigError(where() + ": empty section name");
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + ": expected 'key = value'");
    auto key = std::string(textio::trim(body.substr(0, eq)));
    auto value = std::string(textio::trim(body.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where() + ": empty key");
    if (section.empty()) throw ConfigError(where() + ": key '" + key + "' outside any [section]");
    file.values_[section + "." + key] = value;
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void ConfigFile::apply_override(std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like section.key=value");
  }
  auto key = std::string(textio::trim(assignment.substr(0, eq)));
  if (key.find('.') == std::string::npos) {
    throw ConfigError("override key '" + key + "' must include its section (section.key)");
  }
  values_[key] = std::string(textio::trim(assignment.substr(eq + 1)));
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ConfigFile::write(std::ostream& out) const {
  std::string current;
  bool first = true;
  for (const auto& [key, value] : values_) {
    auto dot = key.find('.');
    auto section = key.substr(0, dot);
    if (section != current) {
      if (!first) out << '\n';
      out << '[' << section << "]\n";
      current = section;
      first = false;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
}

// ---------------------------------------------------------------------------
// Table1D

Table1D::Table1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) throw ConfigError("table: x and y sizes differ");
  if (x_.empty()) throw ConfigError("table: no points");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (x_[i] < x_[i - 1]) throw ConfigError("table: x values must be non-decreasing");
    if (i >= 2 && x_[i] == x_[i - 1] && x_[i - 1] == x_[i - 2]) {
      throw ConfigError("table: at most two points may share an x value");
    }
  }
}

Table1D Table1D::parse(std::string_view text, std::string_view what) {
  std::vector<double> x, y;
  for (auto item : textio::split(text, ',')) {
    item = textio::trim(item);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError(std::string(what) + ": expected 'x:y' pairs, got '" + std::string(item) + "'");
    }
    x.push_back(textio::parse_double(item.substr(0, colon), what));
    y.push_back(textio::parse_double(item.substr(colon + 1), what));
  }
  return Table1D(std::move(x), std::move(y));
}

double Table1D::operator()(double x) const noexcept {
  if (x_.empty()) return 0.0;
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return y_.front();
  if (it == x_.end()) return y_.back();
  const auto i = static_cast<std::size_t>(it - x_.begin());
  const double x0 = x_[i - 1], x1 = x_[i];
  const double t = (x - x0) / (x1 - x0);
  return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

std::string Table1D::to_text() const {
  std::string s;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (i) s += ", ";
    s += textio::format_double(x_[i]) + ":" + textio::format_double(y_[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// SimConfig

double SimConfig::recovery_tau_ns() const {
  const auto& xs = recovery_profile.xs();
  const auto& ys = recovery_profile.ys();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] >= 1.0) return xs[i];
  }
  return xs.empty() ? 0.0 : xs.back();
}

double SimConfig::dead_time_ns() const {
  const auto& xs = recovery_profile.xs();
  const auto& ys = recovery_profile.ys();
  double dead = 0.0;
  for (std::size_t i = 0; i < xs.size() && ys[i] == 0.0; ++i) dead = xs[i];
  return dead;
}

double SimConfig::penalty(int recovering) const noexcept {
  if (redistribution_penalty.empty()) return 1.0;
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, recovering)),
                                       redistribution_penalty.size() - 1);
  return redistribution_penalty[k];
}

double SimConfig::level_amplitude(int clicks) const noexcept {
  if (clicks <= crosstalk_free_clicks) return static_cast<double>(clicks);
  return crosstalk_free_clicks + (clicks - crosstalk_free_clicks) * saturation_slope;
}

std::vector<double> SimConfig::threshold_ladder() const {
  if (!thresholds.empty()) return thresholds;
  std::vector<double> ladder;
  for (int n = 1; n <= detector.pixel_count; ++n) {
    ladder.push_back(0.5 * (level_amplitude(n - 1) + level_amplitude(n)));
  }
  return ladder;
}

double SimConfig::jitter_fwhm(int level, double detected_rate_hz) const noexcept {
  double base = 0.0;
  if (!jitter_fwhm_ps.empty()) {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(level, 1) - 1),
                                         jitter_fwhm_ps.size() - 1);
    base = jitter_fwhm_ps[i];
  }
  const double extra = jitter_rate_broadening.empty() ? 0.0 : jitter_rate_broadening(detected_rate_hz / 1e6);
  return std::sqrt(base * base + extra * extra);
}

void SimConfig::validate() const {
  detector.validate();
  if (recovery_profile.empty()) throw ConfigError("recovery.profile must have at least one point");
  for (double y : recovery_profile.ys()) {
    if (!(y >= 0.0 && y <= 1.0)) throw ConfigError("recovery.profile efficiencies must lie in [0,1]");
  }
  for (double x : recovery_profile.xs()) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("recovery.profile times must be >= 0");
  }
  if (recovery_profile.ys().back() != 1.0) {
    throw ConfigError("recovery.profile must end at full efficiency (1)");
  }
  if (redistribution_penalty.empty()) throw ConfigError("recovery.penalty must have at least one entry");
  for (double f : redistribution_penalty) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("recovery.penalty multipliers must lie in [0,1]");
  }
  if (!(rise_time_ps > 0.0)) throw ConfigError("pulse.rise_time_ps must be > 0");
  if (!(pulse_decay_ns > 0.0)) throw ConfigError("pulse.decay_ns must be > 0");
  if (!(amplitude_noise_sigma >= 0.0)) throw ConfigError("pulse.noise_sigma must be >= 0");
  if (crosstalk_free_clicks < 1) throw ConfigError("pulse.crosstalk_free_clicks must be >= 1");
  if (!(saturation_slope >= 0.0)) throw ConfigError("pulse.saturation_slope must be >= 0");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw ConfigError("pulse.thresholds must increase");
  }
  if (jitter_fwhm_ps.empty()) throw ConfigError("jitter.level_fwhm_ps must have at least one entry");
  for (double j : jitter_fwhm_ps) {
    if (!(j >= 0.0)) throw ConfigError("jitter.level_fwhm_ps entries must be >= 0");
  }
  for (double j : jitter_rate_broadening.ys()) {
    if (!(j >= 0.0)) throw ConfigError("jitter.rate_broadening values must be >= 0");
  }
  if (workers < 0) throw ConfigError("run.workers must be >= 0");
  if (shard_photons == 0 || shard_shots == 0) throw ConfigError("run shard sizes must be > 0");
}

namespace {

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (auto item : textio::split(text, ',')) {
    item = textio::trim(item);
    if (item.empty()) continue;
    out.push_back(textio::parse_double(item, what));
  }
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += textio::format_double(v[i]);
  }
  return s;
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"detector.pixels",
       [](SimConfig& c, const std::string& v) {
         c.detector.pixel_count = static_cast<int>(textio::parse_int(v, "detector.pixels"));
       }},
      {"detector.eta",
       [](SimConfig& c, const std::string& v) { c.detector.eta = textio::parse_double(v, "detector.eta"); }},
      {"detector.splitter_loss_db",
       [](SimConfig& c, const std::string& v) {
         c.detector.splitter_loss_db = textio::parse_double(v, "detector.splitter_loss_db");
       }},
      {"detector.dark_count_rate",
       [](SimConfig& c, const std::string& v) {
         c.detector.dark_count_rate = textio::parse_double(v, "detector.dark_count_rate");
       }},
      {"recovery.profile",
       [](SimConfig& c, const std::string& v) { c.recovery_profile = Table1D::parse(v, "recovery.profile"); }},
      {"recovery.penalty",
       [](SimConfig& c, const std::string& v) { c.redistribution_penalty = parse_list(v, "recovery.penalty"); }},
      {"pulse.rise_time_ps",
       [](SimConfig& c, const std::string& v) { c.rise_time_ps = textio::parse_double(v, "pulse.rise_time_ps"); }},
      {"pulse.decay_ns",
       [](SimConfig& c, const std::string& v) { c.pulse_decay_ns = textio::parse_double(v, "pulse.decay_ns"); }},
      {"pulse.noise_sigma",
       [](SimConfig& c, const std::string& v) {
         c.amplitude_noise_sigma = textio::parse_double(v, "pulse.noise_sigma");
       }},
      {"pulse.crosstalk_free_clicks",
       [](SimConfig& c, const std::string& v) {
         c.crosstalk_free_clicks = static_cast<int>(textio::parse_int(v, "pulse.crosstalk_free_clicks"));
       }},
      {"pulse.saturation_slope",
       [](SimConfig& c, const std::string& v) {
         c.saturation_slope = textio::parse_double(v, "pulse.saturation_slope");
       }},
      {"pulse.thresholds",
       [](SimConfig& c, const std::string& v) { c.thresholds = parse_list(v, "pulse.thresholds"); }},
      {"jitter.level_fwhm_ps",
       [](SimConfig& c, const std::string& v) { c.jitter_fwhm_ps = parse_list(v, "jitter.level_fwhm_ps"); }},
      {"jitter.rate_broadening",
       [](SimConfig& c, const std::string& v) {
         c.jitter_rate_broadening = v.empty() ? Table1D() : Table1D::parse(v, "jitter.rate_broadening");
       }},
      {"run.seed",
       [](SimConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(textio::parse_int(v, "run.seed"));
       }},
      {"run.workers",
       [](SimConfig& c, const std::string& v) { c.workers = static_cast<int>(textio::parse_int(v, "run.workers")); }},
      {"run.shard_photons",
       [](SimConfig& c, const std::string& v) {
         c.shard_photons = static_cast<std::uint64_t>(textio::parse_int(v, "run.shard_photons"));
       }},
      {"run.shard_shots",
       [](SimConfig& c, const std::string& v) {
         c.shard_shots = static_cast<std::uint64_t>(textio::parse_int(v, "run.shard_shots"));
       }},
  };
  return table;
}

}  // namespace

SimConfig sim_config_from(const ConfigFile& file, SimConfig base) {
  const auto& table = setters();
  for (const auto& [key, value] : file.values()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(base, value);
  }
  base.validate();
  return base;
}

SimConfig sim_config_from(const ConfigFile& file) { return sim_config_from(file, SimConfig::parallel28()); }

ConfigFile to_config_file(const SimConfig& c) {
  ConfigFile f;
  f.set("detector.pixels", std::to_string(c.detector.pixel_count));
  f.set("detector.eta", textio::format_double(c.detector.eta));
  f.set("detector.splitter_loss_db", textio::format_double(c.detector.splitter_loss_db));
  f.set("detector.dark_count_rate", textio::format_double(c.detector.dark_count_rate));
  f.set("recovery.profile", c.recovery_profile.to_text());
  f.set("recovery.penalty", list_text(c.redistribution_penalty));
  f.set("pulse.rise_time_ps", textio::format_double(c.rise_time_ps));
  f.set("pulse.decay_ns", textio::format_double(c.pulse_decay_ns));
  f.set("pulse.noise_sigma", textio::format_double(c.amplitude_noise_sigma));
  f.set("pulse.crosstalk_free_clicks", std::to_string(c.crosstalk_free_clicks));
  f.set("pulse.saturation_slope", textio::format_double(c.saturation_slope));
  f.set("pulse.thresholds", list_text(c.thresholds));
  f.set("jitter.level_fwhm_ps", list_text(c.jitter_fwhm_ps));
  f.set("jitter.rate_broadening", c.jitter_rate_broadening.empty() ? "" : c.jitter_rate_broadening.to_text());
  f.set("run.seed", std::to_string(c.seed));
  f.set("run.workers", std::to_string(c.workers));
  f.set("run.shard_photons", std::to_string(c.shard_photons));
  f.set("run.shard_shots", std::to_string(c.shard_shots));
  return f;
}

SimConfig load_sim_config(const std::string& path) { return sim_config_from(ConfigFile::load(path)); }

}  // namespace pnr
