#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pnr/pmatrix.hpp"
#include "pnr/stats.hpp"

namespace pnr {

/// C_n = P_nn S_n / sum_{m>=n} P_nm S_m: probability that an n-click event
/// came from exactly n photons. Throws UndefinedConditionalError if Q_n = 0.
double confidence_n(const ResponseMatrix& p, const PhotonStatistics& s, int n);

/// C_{>1} = 1 - sum_{m>=2} (P_1m + P_0m) S'_m with S' the statistics
/// conditioned on more than one photon.
double confidence_gt1(const ResponseMatrix& p, const PhotonStatistics& s);

enum class ConfidenceMetric { C1, C2, C3, CGreaterThan1 };
enum class ComparisonModel { Intrinsic, Parallel28, BSArray8 };

std::string_view to_string(ConfidenceMetric metric) noexcept;
std::string_view to_string(ComparisonModel model) noexcept;
ConfidenceMetric parse_metric(std::string_view text);

/// One detector family in the comparison. The single-photon efficiency is
/// supplied to the sweep so every family is compared at equal eta.
struct ModelSpec {
  ComparisonModel tag = ComparisonModel::Intrinsic;
  int pixels = 1;
  double loss_db = 0.0;

  static ModelSpec intrinsic() { return {ComparisonModel::Intrinsic, 0, 0.0}; }
  static ModelSpec parallel(int pixels = 28) { return {ComparisonModel::Parallel28, pixels, 0.0}; }
  static ModelSpec bs_array(int detectors = 8, double loss_db = 0.3) {
    return {ComparisonModel::BSArray8, detectors, loss_db};
  }
};

/// The three families of the comparison: intrinsic, 28-pixel parallel array,
/// 8 detectors behind a 0.3 dB splitter.
std::vector<ModelSpec> default_comparison_models();

ResponseMatrix build_model(const ModelSpec& spec, double eta, int m_max);

struct ConfidenceCurve {
  ConfidenceMetric metric = ConfidenceMetric::C1;
  ComparisonModel model = ComparisonModel::Intrinsic;
  std::vector<double> mu_grid;
  std::vector<double> values;       // NaN where the conditional is undefined
  std::vector<std::string> errors;  // empty string where defined
};

/// Logarithmically spaced grid, both ends included.
std::vector<double> log_grid(double lo, double hi, int points);

/// Default grid: 50 log-spaced points on [0.01, 1].
std::vector<double> default_mu_grid();

/// Thermal input at every grid point, truncated so the discarded tail is below
/// 1e-12. Points are independent; `workers` > 1 evaluates them concurrently
/// with identical results.
std::vector<ConfidenceCurve> sweep_comparison(const std::vector<double>& mu_grid, double eta,
                                              const std::vector<ModelSpec>& models,
                                              ConfidenceMetric metric, int workers = 1);

/// Columns mu,value,metric_tag,model_tag. Undefined points are written as
/// "undefined" rather than dropped.
void write_curves_csv(std::ostream& out, const std::vector<ConfidenceCurve>& curves,
                      bool header = true);

}  // namespace pnr
