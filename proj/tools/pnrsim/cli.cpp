#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grid.hpp"
#include "pnr/calibration.hpp"
#include "pnr/confidence.hpp"
#include "pnr/config.hpp"
#include "pnr/errors.hpp"
#include "pnr/inference.hpp"
#include "pnr/mcsim.hpp"
#include "pnr/pmatrix.hpp"
#include "pnr/selfcheck.hpp"
#include "pnr/stats.hpp"
#include "pnr/textio.hpp"
#include "staging.hpp"

namespace pnrcli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Globals {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> sets;
  bool quiet = false;
};

/// Looks for `name` as given, then in the source and install config
/// directories, with and without a .cfg suffix.
fs::path resolve_config(const std::string& name) {
  std::vector<fs::path> candidates = {name, name + ".cfg"};
  for (const char* dir : {PNR_SOURCE_CONFIG_DIR, PNR_INSTALL_CONFIG_DIR}) {
    candidates.emplace_back(fs::path(dir) / name);
    candidates.emplace_back(fs::path(dir) / (name + ".cfg"));
  }
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return c;
  }
  throw pnr::ConfigError("config file not found: " + name);
}

class Session {
 public:
  Session(const Globals& g, std::ostream& out, std::ostream& err, std::string command)
      : g_(g), out_(out), err_(err), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  /// Resolves the simulation config: preset, then --config, then --set, then
  /// --seed / --workers.
  const pnr::SimConfig& config(const pnr::SimConfig& preset) {
    pnr::ConfigFile file;
    if (!g_.config.empty()) {
      const auto path = resolve_config(g_.config);
      file = pnr::ConfigFile::load(path.string());
      config_source_ = path.string();
    }
    for (const auto& s : g_.sets) file.apply_override(s);
    if (g_.seed) file.set("run.seed", std::to_string(*g_.seed));
    if (g_.workers) file.set("run.workers", std::to_string(*g_.workers));
    cfg_ = pnr::sim_config_from(file, preset);
    cfg_.validate();
    return cfg_;
  }

  void note(const std::string& msg) const {
    if (!g_.quiet) err_ << msg << '\n';
  }

  void log_seed() const {
    note("seed " + std::to_string(cfg_.seed) + (g_.seed ? " (--seed)" : " (config default)"));
  }

  std::ostream& out() { return out_; }
  json& parameters() { return parameters_; }
  StagedOutputs& outputs() {
    if (!staged_) staged_ = std::make_unique<StagedOutputs>(g_.out_dir);
    return *staged_;
  }

  /// Writes manifest.json and moves everything into the output directory.
  void finish() {
    auto& st = outputs();
    const auto data_files = st.final_paths();
    json m;
    m["command"] = command_;
    m["tool_version"] = PNR_VERSION;
    m["seed"] = cfg_.seed;
    m["config_source"] = config_source_.empty() ? "built-in preset" : config_source_;
    json snapshot = json::object();
    const auto file = pnr::to_config_file(cfg_);
    for (const auto& [k, v] : file.values()) snapshot[k] = v;
    m["config"] = snapshot;
    m["parameters"] = parameters_;
    m["outputs"] = data_files;
    m["duration_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto f = st.open("manifest.json");
    f << m.dump(2) << '\n';
    f.close();
    if (!f) throw pnr::IoError("failed writing manifest.json");
    st.commit();
    note("wrote " + std::to_string(data_files.size() + 1) + " files to " + g_.out_dir);
  }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  pnr::SimConfig cfg_ = pnr::SimConfig::parallel28();
  std::string config_source_;
  json parameters_ = json::object();
  std::unique_ptr<StagedOutputs> staged_;
};

template <class Fn>
void write_file(Session& s, const std::string& name, Fn&& fn) {
  auto f = s.outputs().open(name);
  fn(f);
  f.close();
  if (!f) throw pnr::IoError("failed writing " + name);
}

// ---------------------------------------------------------------------------
// Model selection shared by pmatrix / forward / reconstruct

struct ModelArgs {
  std::string model = "multiplexed";
  std::optional<int> pixels;
  int detectors = 8;
  std::optional<double> eta;
  std::optional<double> loss_db;
  int m_max = 40;
  std::optional<int> n_max;

  void add(CLI::App* app, bool with_nmax) {
    app->add_option("--model", model, "multiplexed | intrinsic | bsarray")
        ->check(CLI::IsMember({"multiplexed", "intrinsic", "bsarray"}))
        ->capture_default_str();
    app->add_option("--pixels", pixels, "Pixel count (default: detector.pixels of the config)");
    app->add_option("--detectors", detectors, "Detector count for bsarray")->capture_default_str();
    app->add_option("--eta", eta, "Single-photon efficiency (default: detector.eta of the config)");
    app->add_option("--loss-db", loss_db, "Splitter loss in dB (default: detector.splitter_loss_db)");
    app->add_option("--mmax", m_max, "Largest photon number")->capture_default_str();
    if (with_nmax) app->add_option("--nmax", n_max, "Largest click number");
  }

  pnr::ResponseMatrix build(const pnr::SimConfig& cfg, json& params, int m) const {
    pnr::DetectorConfig d = cfg.detector;
    if (pixels) d.pixel_count = *pixels;
    if (eta) d.eta = *eta;
    if (loss_db) d.splitter_loss_db = *loss_db;
    params["model"] = model;
    params["eta"] = d.eta;
    params["m_max"] = m;
    if (model == "intrinsic") {
      if (!(d.eta >= 0.0 && d.eta <= 1.0)) throw pnr::ConfigError("--eta must lie in [0,1]");
      auto p = pnr::build_intrinsic(d.eta, m);
      if (n_max && *n_max != p.n_max()) throw pnr::ConfigError("--nmax is fixed to --mmax for intrinsic");
      return p;
    }
    params["loss_db"] = d.splitter_loss_db;
    if (model == "bsarray") {
      params["detectors"] = detectors;
      return pnr::build_bs_array(detectors, d.eta, d.splitter_loss_db, m, n_max);
    }
    params["pixels"] = d.pixel_count;
    return pnr::build_multiplexed(d, m, n_max);
  }
};

void write_efficiencies(std::ostream& f, const std::vector<double>& e) {
  f << "n,efficiency\n";
  for (std::size_t n = 0; n < e.size(); ++n) f << n << ',' << pnr::textio::format_double(e[n]) << '\n';
}

std::vector<std::uint64_t> read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pnr::IoError("cannot open " + path);
  std::map<long long, std::uint64_t> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    auto t = pnr::textio::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header) {
      header = false;
      if (t.find_first_not_of("0123456789,. \t") != std::string_view::npos) continue;
    }
    auto parts = pnr::textio::split(t, ',');
    if (parts.size() != 2) throw pnr::ConfigError("counts file: expected 'n,count' rows");
    const auto n = pnr::textio::parse_int(pnr::textio::trim(parts[0]), "counts file n");
    const auto c = pnr::textio::parse_int(pnr::textio::trim(parts[1]), "counts file count");
    if (n < 0 || c < 0) throw pnr::ConfigError("counts file: negative entry");
    rows[n] += static_cast<std::uint64_t>(c);
  }
  if (rows.empty()) throw pnr::ConfigError("counts file: no rows");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(rows.rbegin()->first) + 1, 0);
  for (auto [n, c] : rows) counts[static_cast<std::size_t>(n)] = c;
  return counts;
}

// ---------------------------------------------------------------------------
// Commands

struct PmatrixArgs {
  ModelArgs model;
};

void cmd_pmatrix(Session& s, const PmatrixArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  const auto p = a.model.build(cfg, s.parameters(), a.model.m_max);
  const auto eff = pnr::n_photon_efficiencies(p, p.n_max());
  write_file(s, "pmatrix.csv", [&](std::ostream& f) { pnr::write_matrix_csv(f, p); });
  write_file(s, "efficiencies.csv", [&](std::ostream& f) { write_efficiencies(f, eff); });
  s.finish();
  s.out() << "model=" << a.model.model << " n_max=" << p.n_max() << " m_max=" << p.m_max() << '\n';
  for (std::size_t n = 1; n < std::min<std::size_t>(eff.size(), 4); ++n) {
    s.out() << "P_" << n << n << '=' << fixed(eff[n], 6) << '\n';
  }
}

struct StatsArgs {
  std::string kind = "poisson";
  double mu = 1.0;
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--stats", kind, "poisson | thermal | file")
        ->check(CLI::IsMember({"poisson", "thermal", "file"}))
        ->capture_default_str();
    app->add_option("--mu", mu, "Mean photon number")->capture_default_str();
    app->add_option("--stats-file", file, "Photon statistics (m<TAB>prob) for --stats file");
  }

  pnr::PhotonStatistics build(json& params) const {
    params["stats"] = kind;
    if (kind == "file") {
      if (file.empty()) throw pnr::ConfigError("--stats file needs --stats-file");
      std::ifstream in(file);
      if (!in) throw pnr::IoError("cannot open " + file);
      params["stats_file"] = file;
      return pnr::read_statistics(in);
    }
    params["mu"] = mu;
    return kind == "poisson" ? pnr::poisson_to_tolerance(mu) : pnr::thermal_to_tolerance(mu);
  }
};

struct ForwardArgs {
  ModelArgs model;
  StatsArgs stats;
};

void cmd_forward(Session& s, const ForwardArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  const auto st = a.stats.build(s.parameters());
  const auto p = a.model.build(cfg, s.parameters(), std::max(a.model.m_max, st.m_max()));
  const auto q = pnr::forward(p, st);
  write_file(s, "clicks.csv", [&](std::ostream& f) { pnr::write_click_csv(f, q); });
  write_file(s, "photons.tsv", [&](std::ostream& f) { pnr::write_statistics(f, st); });
  s.finish();
  s.out() << "mean_clicks=" << fixed(q.mean(), 6) << " mean_photons=" << fixed(pnr::mean(st), 6) << '\n';
}

struct ReconstructArgs {
  ModelArgs model;
  double mu = 1.0;
  std::uint64_t shots = 0;
  std::string counts;
};

void cmd_reconstruct(Session& s, const ReconstructArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  auto& params = s.parameters();
  const auto p = a.model.build(cfg, params, a.model.m_max);
  std::optional<pnr::PhotonStatistics> truth;
  pnr::ClickStatistics q = pnr::ClickStatistics::analytic({1.0});
  if (!a.counts.empty()) {
    params["counts_file"] = a.counts;
    q = pnr::ClickStatistics::from_counts(read_counts_csv(a.counts));
  } else {
    if (!(a.mu >= 0.0)) throw pnr::ConfigError("--mu must be >= 0");
    params["mu"] = a.mu;
    params["shots"] = a.shots;
    truth = pnr::poisson(a.mu, p.m_max());
    const auto exact = pnr::forward(p, *truth);
    if (a.shots == 0) {
      q = exact;
    } else {
      s.log_seed();
      q = pnr::ClickStatistics::from_counts(pnr::sample_counts(exact, a.shots, cfg.seed));
    }
  }
  const auto r = pnr::fit_poisson_mu(p, q);
  write_file(s, "clicks.csv", [&](std::ostream& f) { pnr::write_click_csv(f, q); });
  write_file(s, "reconstruction.csv",
             [&](std::ostream& f) { pnr::write_reconstruction_csv(f, r, truth ? &*truth : nullptr); });
  write_file(s, "reconstruction.json", [&](std::ostream& f) { f << pnr::to_json_text(r) << '\n'; });
  s.finish();
  s.out() << "mu_fit=" << fixed(r.mu_fit, 6) << '\n';
  s.out() << "mu_fit_inverted=" << fixed(r.mu_fit_inverted, 6) << '\n';
  if (a.counts.empty() && a.shots > 0) {
    s.out() << "mu_fit_sigma=" << fixed(pnr::mu_fit_stddev(p, a.mu, a.shots), 6) << '\n';
  }
  s.out() << "clipped_mass=" << pnr::textio::format_double(r.clipped_mass) << '\n';
}

std::string metric_key(pnr::ConfidenceMetric m) {
  switch (m) {
    case pnr::ConfidenceMetric::C1:
      return "c1";
    case pnr::ConfidenceMetric::C2:
      return "c2";
    case pnr::ConfidenceMetric::C3:
      return "c3";
    case pnr::ConfidenceMetric::CGreaterThan1:
      return "c_gt1";
  }
  return "unknown";
}

struct ConfidenceArgs {
  std::string metric = "all";
  double eta = 0.9;
  std::string mu_grid = "0.01:1:50log";
};

void cmd_confidence(Session& s, const ConfidenceArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  const auto grid = parse_grid(a.mu_grid, "--mu-grid");
  std::vector<pnr::ConfidenceMetric> metrics;
  if (a.metric == "all") {
    metrics = {pnr::ConfidenceMetric::C1, pnr::ConfidenceMetric::C2, pnr::ConfidenceMetric::C3,
               pnr::ConfidenceMetric::CGreaterThan1};
  } else {
    metrics = {pnr::parse_metric(a.metric)};
  }
  auto& params = s.parameters();
  params["metric"] = a.metric;
  params["eta"] = a.eta;
  params["mu_grid"] = a.mu_grid;
  const auto models = pnr::default_comparison_models();
  std::vector<std::string> summary;
  for (auto metric : metrics) {
    const auto curves = pnr::sweep_comparison(grid, a.eta, models, metric, cfg.workers);
    const std::string tag(pnr::to_string(metric));
    const std::string file_tag = metric_key(metric);
    write_file(s, "confidence_" + file_tag + ".csv", [&](std::ostream& f) { pnr::write_curves_csv(f, curves); });
    double gap = 0.0, margin = INFINITY;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double in = curves[0].values[i], par = curves[1].values[i], bs = curves[2].values[i];
      if (std::isfinite(in) && std::isfinite(par)) gap = std::max(gap, in - par);
      if (std::isfinite(par) && std::isfinite(bs)) margin = std::min(margin, par - bs);
    }
    summary.push_back(tag + ": max(intrinsic - parallel28)=" + fixed(gap, 4) +
                      " min(parallel28 - bsarray8)=" + fixed(margin, 4));
  }
  s.finish();
  for (const auto& line : summary) s.out() << line << '\n';
}

struct RateScanArgs {
  std::string rates = "1e6:3e9:8/dec";
  double photons = 4e5;
};

void cmd_ratescan(Session& s, const RateScanArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  s.log_seed();
  const auto rates = parse_grid(a.rates, "--rates");
  s.parameters()["rates"] = a.rates;
  s.parameters()["photons_per_point"] = a.photons;
  const auto scan = pnr::rate_scan(cfg, rates, {a.photons});
  write_file(s, "ratescan.csv", [&](std::ostream& f) { pnr::write_scan_csv(f, scan); });
  s.finish();
  s.out() << "max_sde=" << fixed(scan.max_sde, 4) << '\n';
  s.out() << "MCR=" << fixed(scan.mcr / 1e6, 1) << " Mcps" << (scan.mcr_is_lower_bound ? " (lower bound)" : "")
          << '\n';
}

struct RecoveryArgs {
  std::string delays = "0:20:81lin";
  std::uint64_t trials = 1000000;
};

void cmd_recovery(Session& s, const RecoveryArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  s.log_seed();
  const auto delays = parse_grid(a.delays, "--delays");
  s.parameters()["delays"] = a.delays;
  s.parameters()["trials"] = a.trials;
  const auto curve = pnr::recovery_curve(cfg, delays, a.trials);
  write_file(s, "recovery.csv", [&](std::ostream& f) {
    f << "delay_ns,normalized_sde\n";
    for (const auto& p : curve) {
      f << pnr::textio::format_double(p.delay_ns) << ',' << pnr::textio::format_double(p.normalized_sde) << '\n';
    }
  });
  s.finish();
  const auto at5 = pnr::recovery_curve(cfg, {5.0, 15.0}, a.trials);
  s.out() << "sde(5 ns)=" << fixed(at5[0].normalized_sde, 4) << " sde(15 ns)=" << fixed(at5[1].normalized_sde, 4)
          << '\n';
}

struct TraceArgs {
  double mu = 3.0;
  std::uint64_t shots = 1000000;
  double pulse_width_ps = 33.0;
  double rep_rate = 40e6;
  std::string grid = "0:8.2:821lin";
  bool events = false;
  bool traces = false;
};

void cmd_tracehist(Session& s, const TraceArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  s.log_seed();
  auto& params = s.parameters();
  params["mu"] = a.mu;
  params["shots"] = a.shots;
  params["pulse_width_ps"] = a.pulse_width_ps;
  params["rep_rate_hz"] = a.rep_rate;
  params["grid"] = a.grid;
  pnr::PulsedOptions o;
  o.mu = a.mu;
  o.shots = a.shots;
  o.pulse_width_ps = a.pulse_width_ps;
  o.rep_rate_hz = a.rep_rate;
  o.keep_events = true;
  const auto run = pnr::simulate_pulsed(cfg, o);
  const auto h = pnr::amplitude_histogram(run.events, parse_grid(a.grid, "--grid"), cfg.amplitude_noise_sigma);
  write_file(s, "staircase.csv", [&](std::ostream& f) { pnr::write_staircase_csv(f, h); });
  write_file(s, "levels.csv", [&](std::ostream& f) {
    f << "clicks,shots,assigned_correctly,threshold_assignment,q\n";
    for (std::size_t c = 0; c < run.confusion.size(); ++c) {
      std::uint64_t total = 0;
      for (auto v : run.confusion[c]) total += v;
      if (total == 0) continue;
      const double thr = c < h.assignment_probability.size() ? h.assignment_probability[c] : NAN;
      f << c << ',' << total << ',' << pnr::textio::format_double(run.assignment_probability(static_cast<int>(c)))
        << ',' << (std::isnan(thr) ? std::string("undefined") : pnr::textio::format_double(thr)) << ','
        << pnr::textio::format_double(run.q.at(static_cast<int>(c))) << '\n';
    }
  });
  if (a.events) write_file(s, "events.csv", [&](std::ostream& f) { pnr::write_events_csv(f, run.events); });
  if (a.traces) {
    write_file(s, "traces.csv", [&](std::ostream& f) {
      const auto t = pnr::linear_grid(-500.0, 5000.0, 10.0);
      f << "t_ps";
      for (int n = 1; n <= cfg.crosstalk_free_clicks; ++n) f << ",level" << n;
      f << '\n';
      std::vector<std::vector<double>> v;
      for (int n = 1; n <= cfg.crosstalk_free_clicks; ++n) {
        v.push_back(pnr::render_trace(cfg, cfg.level_amplitude(n), -500.0, 5000.0, 10.0));
      }
      for (std::size_t i = 0; i < t.size(); ++i) {
        f << pnr::textio::format_double(t[i]);
        for (const auto& col : v) f << ',' << pnr::textio::format_double(col[i]);
        f << '\n';
      }
    });
  }
  s.finish();
  s.out() << "plateaus=" << h.plateaus.size() << " populated_levels=" << h.populated_levels
          << " overlap=" << (h.overlap ? "yes" : "no") << " overlap_estimate="
          << pnr::textio::format_double(h.overlap_estimate) << '\n';
  s.out() << "p_assign(2 clicks)=" << fixed(run.assignment_probability(2), 4)
          << " saturated_shots=" << run.saturated_shots << '\n';
}

struct JitterArgs {
  std::string rates = "0,25e6,50e6,100e6,150e6,200e6";
  std::uint64_t samples = 400000;
};

void cmd_jitterscan(Session& s, const JitterArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  s.log_seed();
  s.parameters()["detected_rates"] = a.rates;
  s.parameters()["samples"] = a.samples;
  pnr::JitterOptions o;
  o.samples = a.samples;
  const auto j = pnr::jitter_scan(cfg, parse_grid(a.rates, "--rates"), o);
  write_file(s, "jitter.csv", [&](std::ostream& f) { pnr::write_jitter_csv(f, j); });
  s.finish();
  for (std::size_t i = 0; i < j.detected_rate.size(); ++i) {
    s.out() << fixed(j.detected_rate[i] / 1e6, 1) << " Mcps: " << fixed(j.fwhm_ps[i], 1) << " ps FWHM"
            << (j.low_statistics[i] ? " (low statistics)" : "") << '\n';
  }
}

struct GcpsArgs {
  std::string etas = "0.88,0.86,0.85,0.82";
  double splitter_db = 0.5;
  std::string connector_db = "0.1,0.1";
  std::string rates = "1e7:1e10:8/dec";
  double photons = 4e5;
};

void cmd_gcps(Session& s, const GcpsArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::gcps_arm());
  s.log_seed();
  const auto etas = parse_list(a.etas, "--etas");
  if (etas.size() != 4) throw pnr::ConfigError("--etas needs exactly four values");
  std::vector<pnr::SimConfig> arms(4, cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    arms[i].detector.eta = etas[i];
    arms[i].validate();
  }
  auto& params = s.parameters();
  params["etas"] = etas;
  params["splitter_db"] = a.splitter_db;
  params["connector_db"] = a.connector_db;
  params["rates"] = a.rates;
  params["photons_per_point"] = a.photons;
  const auto r = pnr::gcps_aggregate(arms, a.splitter_db, parse_list(a.connector_db, "--connector-db"),
                                     parse_grid(a.rates, "--rates"), {a.photons});
  write_file(s, "gcps.csv", [&](std::ostream& f) { pnr::write_scan_csv(f, r.aggregate); });
  for (std::size_t i = 0; i < 4; ++i) {
    write_file(s, "gcps_arm" + std::to_string(i) + ".csv",
               [&](std::ostream& f) { pnr::write_scan_csv(f, r.arms[i]); });
  }
  s.finish();
  s.out() << "transmission=" << fixed(r.transmission, 4) << " ideal_max_sde=" << fixed(r.ideal_max_sde, 4)
          << '\n';
  s.out() << "max_sde=" << fixed(r.aggregate.max_sde, 4) << " MCR=" << fixed(r.aggregate.mcr / 1e9, 3) << " Gcps"
          << (r.aggregate.mcr_is_lower_bound ? " (lower bound)" : "") << '\n';
}

struct CalibrateArgs {
  double target_mcr = 250e6;
  std::string rates = "1e6:3e9:8/dec";
  double photons = 4e5;
  double probe_delay_ns = 5.0;
  double recovery_target = 0.96;
  double slope_hi = 1.0;
  std::string output = "calibrated.cfg";
};

void cmd_calibrate(Session& s, const CalibrateArgs& a) {
  const auto& cfg = s.config(pnr::SimConfig::parallel28());
  s.log_seed();
  auto& params = s.parameters();
  params["target_mcr"] = a.target_mcr;
  params["rates"] = a.rates;
  params["photons_per_point"] = a.photons;
  params["probe_delay_ns"] = a.probe_delay_ns;
  params["recovery_target"] = a.recovery_target;
  pnr::CalibrationOptions o;
  o.target_mcr = a.target_mcr;
  o.input_rates = parse_grid(a.rates, "--rates");
  o.scan.photons_per_point = a.photons;
  o.slope_hi = a.slope_hi;
  const double f1 = pnr::anchor_penalty(cfg, a.probe_delay_ns, a.recovery_target);
  const auto r = pnr::calibrate_penalty(cfg, f1, o);
  auto out = cfg;
  out.redistribution_penalty = r.table;
  write_file(s, a.output, [&](std::ostream& f) {
    f << "# penalty f(k) = f1 / (1 + slope*(k-1)), f1 = " << pnr::textio::format_double(r.f1)
      << ", slope = " << pnr::textio::format_double(r.slope) << "\n";
    f << "# target MCR " << pnr::textio::format_double(a.target_mcr) << " clicks/s, reached "
      << pnr::textio::format_double(r.mcr) << "\n";
    pnr::to_config_file(out).write(f);
  });
  s.finish();
  s.out() << "f1=" << pnr::textio::format_double(r.f1) << " slope=" << pnr::textio::format_double(r.slope)
          << " MCR=" << fixed(r.mcr / 1e6, 2) << " Mcps iterations=" << r.iterations << '\n';
}

struct SelftestArgs {
  bool quick = false;
};

int cmd_selftest(const Globals& g, std::ostream& out, std::ostream& err, const SelftestArgs& a) {
  Session s(g, out, err, "selftest");
  pnr::SelfTestOptions o;
  o.quick = a.quick;
  o.config = s.config(pnr::SimConfig::parallel28());
  const auto report = pnr::run_selftest(o);
  pnr::write_report(out, report);
  return report.passed() ? kOk : kSelfTestFailed;
}

// ---------------------------------------------------------------------------

int exit_code(const pnr::Error& e) {
  switch (e.category()) {
    case pnr::Error::Category::Domain:
    case pnr::Error::Category::Config:
      return kConfigError;
    case pnr::Error::Category::Numeric:
      return kNumericError;
    case pnr::Error::Category::Degenerate:
      return kDegenerateInput;
    case pnr::Error::Category::Io:
      return kIoError;
  }
  return kIoError;
}

std::string reference_markdown(CLI::App& app) {
  std::ostringstream md;
  md << "# pnrsim command reference\n\n";
  md << "Generated by `pnrsim reference`. Do not edit by hand.\n\n";
  md << "## Exit codes\n\n";
  md << "| code | meaning |\n|---|---|\n";
  md << "| 0 | success |\n| 1 | I/O or unexpected error |\n| 2 | invalid configuration or arguments |\n";
  md << "| 3 | numeric failure (singular system, no convergence) |\n";
  md << "| 4 | degenerate input (empty histogram, undefined conditional) |\n| 5 | self-test failure |\n\n";
  // app.help() would describe the selected subcommand (reference itself).
  md << "## Global options\n\n```\n" << app.get_formatter()->make_help(&app, "pnrsim", CLI::AppFormatMode::Normal)
     << "```\n\n";
  for (auto* sub : app.get_subcommands({})) {
    md << "## " << sub->get_name() << "\n\n" << sub->get_description() << "\n\n```\n"
       << sub->help("", CLI::AppFormatMode::Sub) << "```\n\n";
  }
  return md.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel-pixel photon-number-resolving detector models and simulator", "pnrsim"};
  app.set_version_flag("--version", std::string(PNR_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Simulation config file (name or path; built-ins live in configs/)");
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--seed", g.seed, "RNG seed (overrides run.seed)");
  app.add_option("--workers", g.workers, "Worker threads, 0 = all cores (overrides run.workers)");
  app.add_option("--set", g.sets, "Config override section.key=value (repeatable)");
  app.add_flag("--quiet", g.quiet, "Suppress informational messages on stderr");

  std::function<int()> action;
  auto session_action = [&](const std::string& name, auto fn) {
    return [&, name, fn]() {
      Session s(g, out, err, name);
      fn(s);
      return static_cast<int>(kOk);
    };
  };

  PmatrixArgs pm;
  auto* c_pm = app.add_subcommand("pmatrix", "Build a response matrix; writes pmatrix.csv and efficiencies.csv");
  pm.model.add(c_pm, true);
  c_pm->callback([&] { action = session_action("pmatrix", [&](Session& s) { cmd_pmatrix(s, pm); }); });

  ForwardArgs fw;
  auto* c_fw = app.add_subcommand("forward", "Click statistics Q = P S; writes clicks.csv and photons.tsv");
  fw.model.add(c_fw, true);
  fw.stats.add(c_fw);
  c_fw->callback([&] { action = session_action("forward", [&](Session& s) { cmd_forward(s, fw); }); });

  ReconstructArgs rc;
  auto* c_rc = app.add_subcommand(
      "reconstruct", "Invert click statistics and fit a Poisson mean; writes reconstruction.csv/.json");
  rc.model.add(c_rc, true);
  c_rc->add_option("--mu", rc.mu, "Poisson mean of the simulated source")->capture_default_str();
  c_rc->add_option("--shots", rc.shots, "Multinomial shots; 0 = exact click statistics")->capture_default_str();
  c_rc->add_option("--counts", rc.counts, "Measured histogram (n,count CSV) instead of a simulated source");
  c_rc->callback([&] { action = session_action("reconstruct", [&](Session& s) { cmd_reconstruct(s, rc); }); });

  ConfidenceArgs cf;
  auto* c_cf = app.add_subcommand(
      "confidence", "Confidence curves for intrinsic, 28-pixel parallel and 8-detector splitter models");
  c_cf->add_option("--metric", cf.metric, "c1 | c2 | c3 | c_gt1 | all")
      ->check(CLI::IsMember({"c1", "c2", "c3", "c_gt1", "all"}))
      ->capture_default_str();
  c_cf->add_option("--eta", cf.eta, "Single-photon efficiency of every model")->capture_default_str();
  c_cf->add_option("--mu-grid", cf.mu_grid, "Thermal mean grid, lo:hi:Nlog | lo:hi:Nlin | list")
      ->capture_default_str();
  c_cf->callback([&] { action = session_action("confidence", [&](Session& s) { cmd_confidence(s, cf); }); });

  RateScanArgs rs;
  auto* c_rs = app.add_subcommand("ratescan", "CW SDE vs detection rate and MCR; writes ratescan.csv");
  c_rs->add_option("--rates", rs.rates, "Input photon-rate grid (photons/s)")->capture_default_str();
  c_rs->add_option("--photons", rs.photons, "Photons simulated per rate point")->capture_default_str();
  c_rs->callback([&] { action = session_action("ratescan", [&](Session& s) { cmd_ratescan(s, rs); }); });

  RecoveryArgs rv;
  auto* c_rv = app.add_subcommand("recovery", "Pump-probe recovery curve; writes recovery.csv");
  c_rv->add_option("--delays", rv.delays, "Probe delays in ns")->capture_default_str();
  c_rv->add_option("--trials", rv.trials, "Pump-probe pairs per delay")->capture_default_str();
  c_rv->callback([&] { action = session_action("recovery", [&](Session& s) { cmd_recovery(s, rv); }); });

  TraceArgs th;
  auto* c_th = app.add_subcommand(
      "tracehist", "Pulsed amplitude staircase and level assignment; writes staircase.csv and levels.csv");
  c_th->add_option("--mu", th.mu, "Mean photons per pulse")->capture_default_str();
  c_th->add_option("--shots", th.shots, "Laser pulses")->capture_default_str();
  c_th->add_option("--pulse-width-ps", th.pulse_width_ps, "Optical pulse width")->capture_default_str();
  c_th->add_option("--rep-rate", th.rep_rate, "Repetition rate in Hz")->capture_default_str();
  c_th->add_option("--grid", th.grid, "Threshold grid in single-click units")->capture_default_str();
  c_th->add_flag("--events", th.events, "Also write events.csv (one row per shot)");
  c_th->add_flag("--traces", th.traces, "Also write noise-free traces.csv for levels 1..8");
  c_th->callback([&] { action = session_action("tracehist", [&](Session& s) { cmd_tracehist(s, th); }); });

  JitterArgs js;
  auto* c_js = app.add_subcommand("jitterscan", "Timing jitter FWHM vs detected rate; writes jitter.csv");
  c_js->add_option("--rates", js.rates, "Detected-rate grid (clicks/s)")->capture_default_str();
  c_js->add_option("--samples", js.samples, "Pulsed clicks per rate point")->capture_default_str();
  c_js->callback([&] { action = session_action("jitterscan", [&](Session& s) { cmd_jitterscan(s, js); }); });

  GcpsArgs gc;
  auto* c_gc = app.add_subcommand(
      "gcps", "Four detectors behind a 1:4 splitter; writes gcps.csv and gcps_arm{0..3}.csv");
  c_gc->add_option("--etas", gc.etas, "Efficiency of each of the four detectors")->capture_default_str();
  c_gc->add_option("--splitter-db", gc.splitter_db, "Splitter insertion loss")->capture_default_str();
  c_gc->add_option("--connector-db", gc.connector_db, "Further losses in dB")->capture_default_str();
  c_gc->add_option("--rates", gc.rates, "Input photon-rate grid before the splitter")->capture_default_str();
  c_gc->add_option("--photons", gc.photons, "Photons per arm per rate point")->capture_default_str();
  c_gc->callback([&] { action = session_action("gcps", [&](Session& s) { cmd_gcps(s, gc); }); });

  CalibrateArgs cb;
  auto* c_cb = app.add_subcommand(
      "calibrate", "Fit the redistribution penalty to a target MCR; writes a calibrated config");
  c_cb->add_option("--target-mcr", cb.target_mcr, "Target MCR in clicks/s")->capture_default_str();
  c_cb->add_option("--rates", cb.rates, "Input photon-rate grid")->capture_default_str();
  c_cb->add_option("--photons", cb.photons, "Photons per rate point")->capture_default_str();
  c_cb->add_option("--probe-delay-ns", cb.probe_delay_ns, "Recovery anchor delay")->capture_default_str();
  c_cb->add_option("--recovery-target", cb.recovery_target, "Normalized SDE at the anchor delay")
      ->capture_default_str();
  c_cb->add_option("--slope-hi", cb.slope_hi, "Upper end of the slope bracket")->capture_default_str();
  c_cb->add_option("--output", cb.output, "Config file name inside --out-dir")->capture_default_str();
  c_cb->callback([&] { action = session_action("calibrate", [&](Session& s) { cmd_calibrate(s, cb); }); });

  SelftestArgs st;
  auto* c_st = app.add_subcommand("selftest", "Run the oracle suite and print a pass/fail table");
  c_st->add_flag("--quick", st.quick, "Reduced statistics (under 10 s)");
  c_st->callback([&] { action = [&] { return cmd_selftest(g, out, err, st); }; });

  std::string preset = "parallel28";
  auto* c_cfg = app.add_subcommand("config", "Print the resolved configuration (preset, --config, --set)");
  c_cfg->add_option("--preset", preset, "Built-in starting point")
      ->check(CLI::IsMember({"parallel28", "single_pixel", "gcps_arm"}))
      ->capture_default_str();
  c_cfg->callback([&] {
    action = [&] {
      Session s(g, out, err, "config");
      const auto base = preset == "single_pixel" ? pnr::SimConfig::single_pixel()
                        : preset == "gcps_arm"   ? pnr::SimConfig::gcps_arm()
                                                 : pnr::SimConfig::parallel28();
      pnr::to_config_file(s.config(base)).write(out);
      return static_cast<int>(kOk);
    };
  });

  std::string ref_out;
  auto* c_ref = app.add_subcommand("reference", "Print this command reference as Markdown");
  c_ref->add_option("--output", ref_out, "Write to a file instead of stdout");
  c_ref->callback([&] {
    action = [&] {
      const auto md = reference_markdown(app);
      if (ref_out.empty()) {
        out << md;
      } else {
        std::ofstream f(ref_out);
        f << md;
        if (!f) throw pnr::IoError("cannot write " + ref_out);
      }
      return static_cast<int>(kOk);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    return action ? action() : static_cast<int>(kConfigError);
  } catch (const pnr::Error& e) {
    err << "error (" << pnr::to_string(e.category()) << "): " << e.what() << '\n';
    return exit_code(e);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace pnrcli
