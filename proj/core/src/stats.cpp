#include "pnr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "pnr/errors.hpp"
#include "pnr/textio.hpp"

namespace pnr {

namespace {

void check_mu(double mu, const char* who) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError(std::string(who) + ": mean photon number must be finite and >= 0");
  }
}

void check_m_max(int m_max, const char* who) {
  if (m_max < 0) throw DomainError(std::string(who) + ": m_max must be >= 0");
}

double poisson_log_pmf(double mu, int m) {
  return -mu + m * std::log(mu) - std::lgamma(m + 1.0);
}

// Mass above m_max. Beyond the mode the terms decrease, so summing them
// directly is accurate even when the tail is far below machine epsilon.
double poisson_tail(double mu, int m_max, double head_sum) {
  if (mu == 0.0) return 0.0;
  if (m_max + 1 <= mu) return std::max(0.0, 1.0 - head_sum);
  double tail = 0.0;
  for (int m = m_max + 1;; ++m) {
    double term = std::exp(poisson_log_pmf(mu, m));
    tail += term;
    if (term <= tail * 1e-17 || term < 1e-300) break;
  }
  return tail;
}

std::vector<double> normalized(std::vector<double> p) {
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

PhotonStatistics::PhotonStatistics(std::vector<double> probs, double tail_mass,
                                   double mu, StatisticsFamily family)
    : probs_(std::move(probs)), tail_mass_(tail_mass), mu_(mu), family_(family) {}

double PhotonStatistics::at(int m) const noexcept {
  if (m < 0 || m >= static_cast<int>(probs_.size())) return 0.0;
  return probs_[static_cast<std::size_t>(m)];
}

PhotonStatistics PhotonStatistics::vacuum(int m_max) {
  check_m_max(m_max, "vacuum");
  std::vector<double> p(static_cast<std::size_t>(m_max) + 1, 0.0);
  p[0] = 1.0;
  return PhotonStatistics(std::move(p), 0.0, 0.0, StatisticsFamily::Custom);
}

PhotonStatistics PhotonStatistics::custom(std::vector<double> probs) {
  if (probs.empty()) throw DomainError("custom statistics: empty probability vector");
  double total = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("custom statistics: entries must lie in [0,1]");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw DomainError("custom statistics: entries sum to " + textio::format_double(total) +
                      ", expected 1");
  }
  auto p = normalized(std::move(probs));
  double mu = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) mu += static_cast<double>(m) * p[m];
  return PhotonStatistics(std::move(p), 0.0, mu, StatisticsFamily::Custom);
}

int default_truncation(double mu) {
  check_mu(mu, "default_truncation");
  return static_cast<int>(std::ceil(4.0 * mu + 20.0));
}

PhotonStatistics poisson(double mu, int m_max) {
  check_mu(mu, "poisson");
  check_m_max(m_max, "poisson");
  std::vector<double> p(static_cast<std::size_t>(m_max) + 1, 0.0);
  if (mu == 0.0) {
    p[0] = 1.0;
    return PhotonStatistics(std::move(p), 0.0, 0.0, StatisticsFamily::Poisson);
  }
  for (int m = 0; m <= m_max; ++m) p[static_cast<std::size_t>(m)] = std::exp(poisson_log_pmf(mu, m));
  double head = std::accumulate(p.begin(), p.end(), 0.0);
  double tail = poisson_tail(mu, m_max, head);
  return PhotonStatistics(normalized(std::move(p)), tail, mu, StatisticsFamily::Poisson);
}

PhotonStatistics thermal(double mu, int m_max) {
  check_mu(mu, "thermal");
  check_m_max(m_max, "thermal");
  std::vector<double> p(static_cast<std::size_t>(m_max) + 1, 0.0);
  if (mu == 0.0) {
    p[0] = 1.0;
    return PhotonStatistics(std::move(p), 0.0, 0.0, StatisticsFamily::Thermal);
  }
  const double log_ratio = std::log(mu / (1.0 + mu));
  const double log_norm = -std::log1p(mu);
  for (int m = 0; m <= m_max; ++m) {
    p[static_cast<std::size_t>(m)] = std::exp(log_norm + m * log_ratio);
  }
  double tail = std::exp((m_max + 1) * log_ratio);
  return PhotonStatistics(normalized(std::move(p)), tail, mu, StatisticsFamily::Thermal);
}

PhotonStatistics poisson_to_tolerance(double mu, double tail_tolerance) {
  int m_max = default_truncation(mu);
  auto s = poisson(mu, m_max);
  while (s.tail_mass() > tail_tolerance) {
    m_max = m_max + m_max / 2 + 1;
    s = poisson(mu, m_max);
  }
  return s;
}

PhotonStatistics thermal_to_tolerance(double mu, double tail_tolerance) {
  int m_max = default_truncation(mu);
  auto s = thermal(mu, m_max);
  while (s.tail_mass() > tail_tolerance) {
    m_max = m_max + m_max / 2 + 1;
    s = thermal(mu, m_max);
  }
  return s;
}

PhotonStatistics renormalize_multiphoton(const PhotonStatistics& s) {
  // Summing the kept terms avoids the cancellation in 1 - S_0 - S_1 at small mu.
  double z = 0.0;
  for (std::size_t m = 2; m < s.size(); ++m) z += s[m];
  if (!(z > 0.0)) {
    throw DegenerateInputError("renormalize_multiphoton: no probability mass above one photon");
  }
  std::vector<double> p(s.size(), 0.0);
  for (std::size_t m = 2; m < s.size(); ++m) p[m] = s[m] / z;
  return PhotonStatistics(std::move(p), s.tail_mass(), s.mu(), s.family());
}

double mean(const PhotonStatistics& s) {
  double acc = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) acc += static_cast<double>(m) * s[m];
  return acc;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = i < a.size() ? a[i] : 0.0;
    double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return 0.5 * acc;
}

void write_statistics(std::ostream& out, const PhotonStatistics& s) {
  out << "# mu=" << textio::format_double(s.mu()) << " m_max=" << s.m_max()
      << " tail_mass=" << textio::format_double(s.tail_mass()) << '\n';
  for (std::size_t m = 0; m < s.size(); ++m) {
    out << m << '\t' << textio::format_double(s[m]) << '\n';
  }
}

PhotonStatistics read_statistics(std::istream& in) {
  std::string line;
  double mu = 0.0;
  double tail = 0.0;
  long long m_max = -1;
  bool have_header = false;
  std::vector<double> p;
  while (std::getline(in, line)) {
    auto view = textio::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      for (auto field : textio::split(view.substr(1), ' ')) {
        field = textio::trim(field);
        auto eq = field.find('=');
        if (eq == std::string_view::npos) continue;
        auto key = field.substr(0, eq);
        auto value = field.substr(eq + 1);
        if (key == "mu") mu = textio::parse_double(value, "mu");
        else if (key == "m_max") m_max = textio::parse_int(value, "m_max");
        else if (key == "tail_mass") tail = textio::parse_double(value, "tail_mass");
      }
      have_header = true;
      continue;
    }
    auto cols = textio::split(view, '\t');
    if (cols.size() != 2) throw ConfigError("statistics file: expected 'm<TAB>prob', got '" + line + "'");
    auto m = textio::parse_int(cols[0], "m");
    if (m != static_cast<long long>(p.size())) {
      throw ConfigError("statistics file: photon numbers must be consecutive from 0");
    }
    double v = textio::parse_double(cols[1], "prob");
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("statistics file: probability outside [0,1]");
    p.push_back(v);
  }
  if (!have_header) throw ConfigError("statistics file: missing '# mu=... m_max=... tail_mass=...' header");
  if (p.empty()) throw ConfigError("statistics file: no rows");
  if (m_max >= 0 && m_max + 1 != static_cast<long long>(p.size())) {
    throw ConfigError("statistics file: header m_max does not match row count");
  }
  if (!(tail >= 0.0 && tail < 1.0)) throw ConfigError("statistics file: tail_mass outside [0,1)");
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("statistics file: probabilities do not sum to 1");
  return PhotonStatistics(std::move(p), tail, mu, StatisticsFamily::Custom);
}

}  // namespace pnr
