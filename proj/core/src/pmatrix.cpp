#include "pnr/pmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "pnr/errors.hpp"
#include "pnr/textio.hpp"

namespace pnr {

std::string_view to_string(ModelTag tag) noexcept {
  switch (tag) {
    case ModelTag::Multiplexed: return "Multiplexed";
    case ModelTag::Intrinsic: return "Intrinsic";
    case ModelTag::BSArray: return "BSArray";
  }
  return "Unknown";
}

double DetectorConfig::effective_eta() const noexcept {
  return eta * std::pow(10.0, -splitter_loss_db / 10.0);
}

void DetectorConfig::validate() const {
  if (pixel_count < 1) throw ConfigError("pixel count must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("efficiency eta must lie in [0,1]");
  if (!(splitter_loss_db >= 0.0) || !std::isfinite(splitter_loss_db)) {
    throw ConfigError("splitter loss must be a finite value >= 0 dB");
  }
  if (!(dark_count_rate >= 0.0) || !std::isfinite(dark_count_rate)) {
    throw ConfigError("dark count rate must be finite and >= 0");
  }
}

ResponseMatrix::ResponseMatrix(int n_max, int m_max, ModelTag tag)
    : n_max_(n_max), m_max_(m_max), tag_(tag) {
  if (n_max < 0 || m_max < 0) throw DomainError("response matrix bounds must be >= 0");
  data_.assign(rows() * cols(), 0.0);
}

double ResponseMatrix::at(int n, int m) const noexcept {
  if (n < 0 || m < 0 || n > n_max_ || m > m_max_) return 0.0;
  return (*this)(n, m);
}

std::vector<double> ResponseMatrix::column(int m) const {
  std::vector<double> c(rows());
  for (int n = 0; n <= n_max_; ++n) c[static_cast<std::size_t>(n)] = (*this)(n, m);
  return c;
}

std::vector<double> occupancy_distribution(int k, int pixels) {
  if (k < 0) throw DomainError("occupancy: photon count must be >= 0");
  if (pixels < 1) throw DomainError("occupancy: pixel count must be >= 1");
  const auto size = static_cast<std::size_t>(pixels) + 1;
  std::vector<double> v(size, 0.0), next(size, 0.0);
  v[0] = 1.0;
  const double inv = 1.0 / pixels;
  for (int step = 0; step < k; ++step) {
    next[0] = 0.0;
    for (int n = 1; n <= pixels; ++n) {
      next[static_cast<std::size_t>(n)] = v[static_cast<std::size_t>(n)] * (n * inv) +
                                          v[static_cast<std::size_t>(n) - 1] * ((pixels - n + 1) * inv);
    }
    std::swap(v, next);
  }
  return v;
}

std::vector<double> occupancy_inclusion_exclusion(int k, int pixels) {
  if (pixels < 1 || pixels > 10) {
    throw DomainError("inclusion-exclusion occupancy is limited to 1..10 pixels");
  }
  if (k < 0) throw DomainError("occupancy: photon count must be >= 0");
  auto choose = [](int n, int r) {
    double c = 1.0;
    for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
    return c;
  };
  std::vector<double> v(static_cast<std::size_t>(pixels) + 1, 0.0);
  for (int n = 0; n <= pixels; ++n) {
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
      double term = choose(n, j) * std::pow(static_cast<double>(n - j) / pixels, k);
      acc += (j % 2 == 0) ? term : -term;
    }
    v[static_cast<std::size_t>(n)] = std::max(0.0, choose(pixels, n) * acc);
  }
  return v;
}

double binomial_pmf(int k, int m, double p) {
  if (k < 0 || k > m) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == m ? 1.0 : 0.0;
  if (m <= 60) {
    const int r = std::min(k, m - k);
    double c = 1.0;
    for (int i = 1; i <= r; ++i) c = c * (m - r + i) / i;
    return c * std::pow(p, k) * std::pow(1.0 - p, m - k);
  }
  double log_c = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
  return std::exp(log_c + k * std::log(p) + (m - k) * std::log1p(-p));
}

namespace {

ResponseMatrix build_occupancy_model(int pixels, double eta_eff, int m_max,
                                     std::optional<int> n_max, ModelTag tag) {
  if (m_max < 0) throw DomainError("m_max must be >= 0");
  const int rows = n_max.value_or(std::min(pixels, m_max));
  if (rows > pixels) {
    throw ConfigError("an array of " + std::to_string(pixels) + " pixels cannot produce " +
                      std::to_string(rows) + " clicks");
  }
  if (rows < 0) throw ConfigError("n_max must be >= 0");

  ResponseMatrix p(rows, m_max, tag);
  std::vector<std::vector<double>> occ;
  occ.reserve(static_cast<std::size_t>(m_max) + 1);
  occ.push_back(occupancy_distribution(0, pixels));
  for (int k = 1; k <= m_max; ++k) {
    // One more step of the recurrence from the previous row.
    const auto& prev = occ.back();
    std::vector<double> v(prev.size(), 0.0);
    for (int n = 1; n <= pixels; ++n) {
      v[static_cast<std::size_t>(n)] = prev[static_cast<std::size_t>(n)] * (static_cast<double>(n) / pixels) +
                                       prev[static_cast<std::size_t>(n) - 1] *
                                           (static_cast<double>(pixels - n + 1) / pixels);
    }
    occ.push_back(std::move(v));
  }

  for (int m = 0; m <= m_max; ++m) {
    for (int k = 0; k <= m; ++k) {
      const double b = binomial_pmf(k, m, eta_eff);
      if (b == 0.0) continue;
      const int top = std::min({k, pixels, rows});
      for (int n = 0; n <= top; ++n) p(n, m) += b * occ[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
    }
  }
  return p;
}

}  // namespace

ResponseMatrix build_multiplexed(const DetectorConfig& cfg, int m_max, std::optional<int> n_max) {
  cfg.validate();
  return build_occupancy_model(cfg.pixel_count, cfg.effective_eta(), m_max, n_max,
                               ModelTag::Multiplexed);
}

ResponseMatrix build_intrinsic(double eta, int m_max) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("efficiency eta must lie in [0,1]");
  if (m_max < 0) throw DomainError("m_max must be >= 0");
  ResponseMatrix p(m_max, m_max, ModelTag::Intrinsic);
  for (int m = 0; m <= m_max; ++m) {
    for (int n = 0; n <= m; ++n) p(n, m) = binomial_pmf(n, m, eta);
  }
  return p;
}

ResponseMatrix build_bs_array(int detector_count, double eta, double splitter_loss_db, int m_max,
                              std::optional<int> n_max) {
  DetectorConfig cfg{detector_count, eta, splitter_loss_db, 0.0};
  cfg.validate();
  return build_occupancy_model(detector_count, cfg.effective_eta(), m_max, n_max,
                               ModelTag::BSArray);
}

std::vector<double> n_photon_efficiencies(const ResponseMatrix& p, int n_max) {
  if (n_max < 0 || n_max > std::min(p.n_max(), p.m_max())) {
    throw DomainError("n_photon_efficiencies: n_max " + std::to_string(n_max) +
                      " outside the matrix diagonal");
  }
  std::vector<double> d(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) d[static_cast<std::size_t>(n)] = p(n, n);
  return d;
}

double multiplexed_diagonal(int pixels, double eta, int n) {
  if (n < 0 || n > pixels) return 0.0;
  double v = 1.0;
  for (int i = 0; i < n; ++i) v *= (pixels - i) * (eta / pixels);
  return v;
}

void write_matrix_csv(std::ostream& out, const ResponseMatrix& p) {
  for (int m = 0; m <= p.m_max(); ++m) {
    if (m) out << ',';
    out << "m=" << m;
  }
  out << '\n';
  for (int n = 0; n <= p.n_max(); ++n) {
    for (int m = 0; m <= p.m_max(); ++m) {
      if (m) out << ',';
      out << textio::format_double(p(n, m));
    }
    out << '\n';
  }
}

ResponseMatrix read_matrix_csv(std::istream& in, ModelTag tag) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("matrix csv: empty input");
  auto header = textio::split(textio::trim(line), ',');
  for (std::size_t m = 0; m < header.size(); ++m) {
    if (textio::trim(header[m]) != "m=" + std::to_string(m)) {
      throw ConfigError("matrix csv: header column " + std::to_string(m) + " must be 'm=" +
                        std::to_string(m) + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    auto view = textio::trim(line);
    if (view.empty()) continue;
    auto cells = textio::split(view, ',');
    if (cells.size() != header.size()) throw ConfigError("matrix csv: ragged row");
    std::vector<double> r;
    r.reserve(cells.size());
    for (auto c : cells) r.push_back(textio::parse_double(c, "matrix entry"));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError("matrix csv: no rows");
  ResponseMatrix p(static_cast<int>(rows.size()) - 1, static_cast<int>(header.size()) - 1, tag);
  for (int n = 0; n <= p.n_max(); ++n) {
    for (int m = 0; m <= p.m_max(); ++m) {
      double v = rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("matrix csv: entry outside [0,1]");
      if (n > m && v != 0.0) throw ConfigError("matrix csv: nonzero entry below the diagonal (n > m)");
      p(n, m) = v;
    }
  }
  return p;
}

}  // namespace pnr
