#include "pnr/confidence.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "pnr/errors.hpp"
#include "pnr/parallel.hpp"
#include "pnr/textio.hpp"

namespace pnr {

namespace {

void require_columns(const ResponseMatrix& p, const PhotonStatistics& s, const char* who) {
  for (std::size_t m = p.cols(); m < s.size(); ++m) {
    if (s[m] != 0.0) {
      throw DomainError(std::string(who) + ": statistics extend beyond the response matrix (m_max=" +
                        std::to_string(p.m_max()) + ")");
    }
  }
}

}  // namespace

double confidence_n(const ResponseMatrix& p, const PhotonStatistics& s, int n) {
  if (n < 0) throw DomainError("confidence_n: n must be >= 0");
  require_columns(p, s, "confidence_n");
  if (n > p.n_max()) {
    throw UndefinedConditionalError("confidence_n: the detector never produces " + std::to_string(n) +
                                    " clicks");
  }
  double q = 0.0;
  const int m_top = std::min(p.m_max(), s.m_max());
  for (int m = n; m <= m_top; ++m) q += p(n, m) * s[static_cast<std::size_t>(m)];
  if (!(q > 0.0)) {
    throw UndefinedConditionalError("confidence_n: Q_" + std::to_string(n) +
                                    " = 0, the conditional is undefined");
  }
  const double c = p.at(n, n) * s.at(n) / q;
  return std::min(1.0, std::max(0.0, c));
}

double confidence_gt1(const ResponseMatrix& p, const PhotonStatistics& s) {
  require_columns(p, s, "confidence_gt1");
  const auto conditioned = renormalize_multiphoton(s);
  double missed = 0.0;
  for (std::size_t m = 2; m < conditioned.size(); ++m) {
    missed += (p.at(1, static_cast<int>(m)) + p.at(0, static_cast<int>(m))) * conditioned[m];
  }
  return std::min(1.0, std::max(0.0, 1.0 - missed));
}

std::string_view to_string(ConfidenceMetric metric) noexcept {
  switch (metric) {
    case ConfidenceMetric::C1: return "C1";
    case ConfidenceMetric::C2: return "C2";
    case ConfidenceMetric::C3: return "C3";
    case ConfidenceMetric::CGreaterThan1: return "CGreaterThan1";
  }
  return "unknown";
}

std::string_view to_string(ComparisonModel model) noexcept {
  switch (model) {
    case ComparisonModel::Intrinsic: return "Intrinsic";
    case ComparisonModel::Parallel28: return "Parallel28";
    case ComparisonModel::BSArray8: return "BSArray8";
  }
  return "unknown";
}

ConfidenceMetric parse_metric(std::string_view text) {
  if (text == "c1" || text == "C1") return ConfidenceMetric::C1;
  if (text == "c2" || text == "C2") return ConfidenceMetric::C2;
  if (text == "c3" || text == "C3") return ConfidenceMetric::C3;
  if (text == "c_gt1" || text == "cgt1" || text == "CGreaterThan1") return ConfidenceMetric::CGreaterThan1;
  throw ConfigError("unknown confidence metric '" + std::string(text) + "' (c1, c2, c3, c_gt1)");
}

std::vector<ModelSpec> default_comparison_models() {
  return {ModelSpec::intrinsic(), ModelSpec::parallel(28), ModelSpec::bs_array(8, 0.3)};
}

ResponseMatrix build_model(const ModelSpec& spec, double eta, int m_max) {
  switch (spec.tag) {
    case ComparisonModel::Intrinsic: return build_intrinsic(eta, m_max);
    case ComparisonModel::Parallel28:
      return build_multiplexed(DetectorConfig{spec.pixels, eta, spec.loss_db, 0.0}, m_max);
    case ComparisonModel::BSArray8: return build_bs_array(spec.pixels, eta, spec.loss_db, m_max);
  }
  throw ConfigError("unknown comparison model");
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1) throw DomainError("log_grid: need at least one point");
  if (!(lo > 0.0 && hi >= lo)) throw DomainError("log_grid: need 0 < lo <= hi");
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  g.back() = hi;
  return g;
}

std::vector<double> default_mu_grid() { return log_grid(0.01, 1.0, 50); }

std::vector<ConfidenceCurve> sweep_comparison(const std::vector<double>& mu_grid, double eta,
                                              const std::vector<ModelSpec>& models,
                                              ConfidenceMetric metric, int workers) {
  if (mu_grid.empty()) throw DomainError("sweep_comparison: empty mu grid");
  std::vector<PhotonStatistics> inputs;
  inputs.reserve(mu_grid.size());
  int m_max = 0;
  for (double mu : mu_grid) {
    inputs.push_back(thermal_to_tolerance(mu, 1e-12));
    m_max = std::max(m_max, inputs.back().m_max());
  }

  std::vector<ConfidenceCurve> curves;
  for (const auto& spec : models) {
    const auto p = build_model(spec, eta, m_max);
    ConfidenceCurve curve;
    curve.metric = metric;
    curve.model = spec.tag;
    curve.mu_grid = mu_grid;
    curve.values.assign(mu_grid.size(), std::numeric_limits<double>::quiet_NaN());
    curve.errors.assign(mu_grid.size(), std::string());
    parallel_for(mu_grid.size(), workers, [&](std::size_t i) {
      try {
        switch (metric) {
          case ConfidenceMetric::C1: curve.values[i] = confidence_n(p, inputs[i], 1); break;
          case ConfidenceMetric::C2: curve.values[i] = confidence_n(p, inputs[i], 2); break;
          case ConfidenceMetric::C3: curve.values[i] = confidence_n(p, inputs[i], 3); break;
          case ConfidenceMetric::CGreaterThan1: curve.values[i] = confidence_gt1(p, inputs[i]); break;
        }
      } catch (const Error& e) {
        curve.errors[i] = e.what();
      }
    });
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_curves_csv(std::ostream& out, const std::vector<ConfidenceCurve>& curves, bool header) {
  if (header) out << "mu,value,metric_tag,model_tag\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.mu_grid.size(); ++i) {
      out << textio::format_double(c.mu_grid[i]) << ','
          << (c.errors[i].empty() ? textio::format_double(c.values[i]) : std::string("undefined"))
          << ',' << to_string(c.metric) << ',' << to_string(c.model) << '\n';
    }
  }
}

}  // namespace pnr
