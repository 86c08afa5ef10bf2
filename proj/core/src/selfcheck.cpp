#include "pnr/selfcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

#include "pnr/errors.hpp"
#include "pnr/inference.hpp"
#include "pnr/mcsim.hpp"
#include "pnr/pmatrix.hpp"
#include "pnr/stats.hpp"

namespace pnr {

bool SelfTestReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const OracleResult& r) { return r.passed; });
}

double brute_force_pnm(int pixels, double eta, int n, int m) {
  double total = 0.0;
  std::vector<int> slot(static_cast<std::size_t>(m), 0);  // 0 = lost, j = pixel j
  while (true) {
    double p = 1.0;
    std::vector<bool> hit(static_cast<std::size_t>(pixels) + 1, false);
    for (int s : slot) {
      p *= s == 0 ? 1.0 - eta : eta / pixels;
      if (s) hit[static_cast<std::size_t>(s)] = true;
    }
    if (std::count(hit.begin(), hit.end(), true) == n) total += p;
    int i = 0;
    while (i < m && ++slot[static_cast<std::size_t>(i)] > pixels) slot[static_cast<std::size_t>(i++)] = 0;
    if (i == m) break;
  }
  return total;
}

std::string check_redistribution_table(const SimConfig& cfg) {
  const auto& t = cfg.redistribution_penalty;
  if (t.empty()) return "empty table";
  if (t[0] != 1.0) return "f(0) != 1";
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0 && t[k] <= 1.0)) return "f(" + std::to_string(k) + ") outside (0,1]";
    if (k && t[k] > t[k - 1]) return "f increases at k=" + std::to_string(k);
  }
  if (t.size() >= 3) {
    const double f1 = t[1];
    const double slope = t[1] / t[2] - 1.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
      const double expect = f1 / (1.0 + slope * static_cast<double>(k - 1));
      if (std::abs(t[k] - expect) > 1e-9 * expect) {
        return "f(" + std::to_string(k) + ") off the calibrated family";
      }
    }
  }
  const int n = cfg.detector.pixel_count;
  if (n > 1 && t.size() >= 2) {
    const double anchor = t[1] * ((n - 1) + cfg.recovery_profile(5.0)) / n;
    if (std::abs(anchor - 0.96) > 0.005) {
      std::ostringstream s;
      s << "recovery anchor at 5 ns is " << anchor << ", expected 0.96";
      return s.str();
    }
  }
  return {};
}

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(3) << x;
  return s.str();
}

OracleResult brute_force_oracle() {
  double worst = 0.0;
  for (int pixels = 1; pixels <= 4; ++pixels) {
    for (double eta : {0.0, 0.25, 0.5, 1.0}) {
      DetectorConfig d;
      d.pixel_count = pixels;
      d.eta = eta;
      const auto p = build_multiplexed(d, 4);
      for (int m = 0; m <= 4; ++m) {
        for (int n = 0; n <= p.n_max(); ++n) {
          worst = std::max(worst, std::abs(p(n, m) - brute_force_pnm(pixels, eta, n, m)));
        }
      }
    }
  }
  return {"brute_force_pmatrix", worst <= 1e-12, "max |diff| " + fmt(worst), 0.0};
}

OracleResult column_sum_oracle() {
  const auto p = build_multiplexed(DetectorConfig{}, 60);
  double worst = 0.0;
  for (int m = 0; m <= p.m_max(); ++m) {
    double s = 0.0;
    for (int n = 0; n <= p.n_max(); ++n) s += p(n, m);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return {"column_sums", worst <= 1e-10, "max |sum-1| " + fmt(worst), 0.0};
}

OracleResult occupancy_oracle() {
  double worst = 0.0;
  for (int pixels = 1; pixels <= 10; ++pixels) {
    for (int k = 0; k <= 12; ++k) {
      const auto a = occupancy_distribution(k, pixels);
      const auto b = occupancy_inclusion_exclusion(k, pixels);
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
  }
  return {"occupancy_cross_check", worst <= 1e-12, "max |diff| " + fmt(worst), 0.0};
}

OracleResult diagonal_oracle() {
  const auto p = build_multiplexed(DetectorConfig{}, 28);
  double worst = 0.0;
  for (int n = 0; n <= 28; ++n) {
    const double expect = multiplexed_diagonal(28, 0.88, n);
    worst = std::max(worst, std::abs(p(n, n) - expect) / std::max(expect, 1e-300));
  }
  return {"diagonal_formula", worst <= 1e-10, "max rel diff " + fmt(worst), 0.0};
}

OracleResult round_trip_oracle() {
  const auto p = build_multiplexed(DetectorConfig{}, 40);
  double worst = 0.0;
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto s = poisson(mu, 40);
    const auto q = forward(p, s);
    const auto inv = invert_triangular(p, q);
    worst = std::max(worst, total_variation(inv.s_hat.probs(), s.probs()));
    const auto fit = fit_poisson_mu(p, q);
    worst = std::max(worst, std::abs(fit.mu_fit - mu));
  }
  return {"analytic_round_trip", worst <= 1e-6, "max error " + fmt(worst), 0.0};
}

OracleResult dead_time_oracle(bool quick) {
  SimConfig c = SimConfig::parallel28();
  c.recovery_profile = Table1D({0.0, 15.0, 15.0}, {0.0, 0.0, 1.0});
  c.redistribution_penalty = {1.0};
  c.detector.dark_count_rate = 0.0;
  const std::vector<double> rates = quick ? std::vector<double>{3e7, 3e8, 3e9}
                                          : std::vector<double>{1e7, 3e7, 1e8, 3e8, 1e9, 3e9};
  ScanOptions o;
  o.photons_per_point = quick ? 2e5 : 1e6;
  const auto scan = rate_scan(c, rates, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double expect = nonparalyzable_detected_rate(rates[i], 0.88, 15e-9, 28);
    worst = std::max(worst, std::abs(scan.detected_rate[i] / expect - 1.0));
  }
  return {"dead_time_analytic", worst <= 0.02, "max rel diff " + fmt(worst), 0.0};
}

OracleResult redistribution_oracle(const SimConfig& cfg) {
  const auto problem = check_redistribution_table(cfg);
  return {"redistribution_table", problem.empty(), problem.empty() ? "consistent" : problem, 0.0};
}

OracleResult determinism_oracle() {
  SimConfig a = SimConfig::parallel28();
  a.shard_photons = 4096;
  a.workers = 1;
  SimConfig b = a;
  b.workers = 3;
  const auto ra = simulate_cw(a, 2e8, 2e-4);
  const auto rb = simulate_cw(b, 2e8, 2e-4);
  const bool same = ra.summary.photons == rb.summary.photons &&
                    ra.summary.photon_clicks == rb.summary.photon_clicks &&
                    ra.summary.dark_clicks == rb.summary.dark_clicks;
  return {"worker_determinism", same, same ? "identical" : "results depend on worker count", 0.0};
}

}  // namespace

SelfTestReport run_selftest(const SelfTestOptions& options) {
  const std::vector<std::pair<std::string, std::function<OracleResult()>>> oracles = {
      {"brute_force_pmatrix", brute_force_oracle},
      {"column_sums", column_sum_oracle},
      {"occupancy_cross_check", occupancy_oracle},
      {"diagonal_formula", diagonal_oracle},
      {"analytic_round_trip", round_trip_oracle},
      {"dead_time_analytic", [&] { return dead_time_oracle(options.quick); }},
      {"redistribution_table", [&] { return redistribution_oracle(options.config); }},
      {"worker_determinism", determinism_oracle},
  };
  SelfTestReport report;
  for (const auto& [name, oracle] : oracles) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleResult r;
    try {
      r = oracle();
    } catch (const std::exception& e) {
      r.name = name;
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.results.push_back(std::move(r));
  }
  return report;
}

void write_report(std::ostream& out, const SelfTestReport& report) {
  for (const auto& r : report.results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(24) << r.name << r.detail << "  ("
        << std::fixed << std::setprecision(2) << r.seconds << " s)\n";
    out.unsetf(std::ios::floatfield);
  }
  out << (report.passed() ? "all oracles passed\n" : "oracle failures\n");
}

}  // namespace pnr
