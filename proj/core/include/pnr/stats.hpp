#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace pnr {

enum class StatisticsFamily { Poisson, Thermal, Custom };

/// Photon-number distribution S_m, truncated at m_max and renormalized.
///
/// Instances are immutable. `tail_mass()` keeps the probability that lay above
/// m_max before renormalization, so callers can judge the truncation.
class PhotonStatistics {
 public:
  static PhotonStatistics vacuum(int m_max = 0);

  /// Arbitrary distribution. Entries must lie in [0,1] and sum to one within
  /// 1e-6; the vector is renormalized exactly. tail_mass is taken as 0.
  static PhotonStatistics custom(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t m) const noexcept { return probs_[m]; }
  /// S_m, or 0 beyond the truncation bound.
  double at(int m) const noexcept;
  std::size_t size() const noexcept { return probs_.size(); }
  int m_max() const noexcept { return static_cast<int>(probs_.size()) - 1; }
  double tail_mass() const noexcept { return tail_mass_; }
  /// Distribution parameter (mean photon number for Poisson/thermal; the mean
  /// of the vector for custom input).
  double mu() const noexcept { return mu_; }
  StatisticsFamily family() const noexcept { return family_; }

 private:
  PhotonStatistics(std::vector<double> probs, double tail_mass, double mu,
                   StatisticsFamily family);

  std::vector<double> probs_;
  double tail_mass_ = 0.0;
  double mu_ = 0.0;
  StatisticsFamily family_ = StatisticsFamily::Custom;

  friend PhotonStatistics poisson(double, int);
  friend PhotonStatistics thermal(double, int);
  friend PhotonStatistics renormalize_multiphoton(const PhotonStatistics&);
  friend PhotonStatistics read_statistics(std::istream&);
};

/// ceil(4*mu + 20).
int default_truncation(double mu);

PhotonStatistics poisson(double mu, int m_max);
inline PhotonStatistics poisson(double mu) { return poisson(mu, default_truncation(mu)); }

/// Single-mode thermal statistics mu^m / (1+mu)^(m+1).
PhotonStatistics thermal(double mu, int m_max);
inline PhotonStatistics thermal(double mu) { return thermal(mu, default_truncation(mu)); }

/// Smallest truncation (starting from the default and growing) whose discarded
/// tail is below `tail_tolerance`.
PhotonStatistics poisson_to_tolerance(double mu, double tail_tolerance = 1e-12);
PhotonStatistics thermal_to_tolerance(double mu, double tail_tolerance = 1e-12);

/// Conditions on more than one photon: [0, 0, S_2/Z, S_3/Z, ...] with
/// Z = sum_{m>=2} S_m. Throws DegenerateInputError when Z is zero.
PhotonStatistics renormalize_multiphoton(const PhotonStatistics& s);

double mean(const PhotonStatistics& s);

/// Total variation distance, treating missing entries as zero.
double total_variation(std::span<const double> a, std::span<const double> b);

/// Plain-text columnar format:
///   # mu=<val> m_max=<val> tail_mass=<val>
///   m<TAB>prob      (one line per m)
void write_statistics(std::ostream& out, const PhotonStatistics& s);
PhotonStatistics read_statistics(std::istream& in);

}  // namespace pnr
