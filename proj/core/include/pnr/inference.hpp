#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnr/pmatrix.hpp"
#include "pnr/stats.hpp"

namespace pnr {

/// Click-number distribution Q_n, analytic (sample_count == 0) or empirical.
class ClickStatistics {
 public:
  ClickStatistics() = default;
  static ClickStatistics analytic(std::vector<double> probs);
  static ClickStatistics from_counts(std::span<const std::uint64_t> counts);

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t n) const noexcept { return probs_[n]; }
  double at(int n) const noexcept;
  std::size_t size() const noexcept { return probs_.size(); }
  int n_max() const noexcept { return static_cast<int>(probs_.size()) - 1; }
  std::uint64_t sample_count() const noexcept { return sample_count_; }
  double mean() const noexcept;

 private:
  std::vector<double> probs_;
  std::uint64_t sample_count_ = 0;
};

/// What to do when S has more entries than P has columns.
enum class ColumnPolicy { Strict, Truncate };

/// Q_n = sum_m P_nm S_m.
ClickStatistics forward(const ResponseMatrix& p, const PhotonStatistics& s,
                        ColumnPolicy policy = ColumnPolicy::Strict);

struct InversionResult {
  PhotonStatistics s_hat = PhotonStatistics::vacuum();
  std::vector<double> raw;     // back-substitution output before clipping
  double clipped_mass = 0.0;   // sum of |negative components| removed
};

/// Back-substitution on the leading square block of P matching Q's length.
/// Negative components are clipped to zero and the result renormalized.
InversionResult invert_triangular(const ResponseMatrix& p, const ClickStatistics& q);

struct MinimizeResult {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search on [lo, hi]. After every step the best point seen so
/// far must still lie inside the bracket, otherwise the objective is not
/// unimodal and ConvergenceError is thrown with the best iterate.
MinimizeResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                       double hi, double x_tolerance, int max_iterations);

struct FitOptions {
  double mu_tolerance = 1e-9;  // golden-section bracket width
  int max_iterations = 200;
};

struct ReconstructionResult {
  PhotonStatistics s_hat = PhotonStatistics::vacuum();  // from triangular inversion
  double mu_fit = 0.0;           // least squares on forward(P, poisson(mu)) vs Q
  double mu_fit_inverted = 0.0;  // least squares of poisson(mu) vs s_hat
  double fit_residual = 0.0;     // sum_m (poisson(mu_fit)_m - s_hat_m)^2
  double forward_residual = 0.0; // sum_n (forward(P, poisson(mu_fit))_n - Q_n)^2
  double clipped_mass = 0.0;
  int iterations = 0;
};

ReconstructionResult fit_poisson_mu(const ResponseMatrix& p, const ClickStatistics& q,
                                    const FitOptions& options = {});

/// One-sigma spread of mu_fit for `shots` multinomial samples of
/// forward(P, poisson(mu)), by linearizing the least-squares estimator
/// (delta method with the multinomial covariance diag(Q) - Q Q^T).
double mu_fit_stddev(const ResponseMatrix& p, double mu, std::uint64_t shots);

/// Multinomial histogram of `shots` draws from q (inverse-CDF per shot).
std::vector<std::uint64_t> sample_counts(const ClickStatistics& q, std::uint64_t shots,
                                         std::uint64_t seed, std::uint64_t stream = 0);

void write_click_csv(std::ostream& out, const ClickStatistics& q);
/// {"mu_fit":..., "mu_fit_inverted":..., "fit_residual":..., "s_hat":[...], ...}
std::string to_json_text(const ReconstructionResult& r);
/// Columns m, s_hat, poisson_fit[, s_true].
void write_reconstruction_csv(std::ostream& out, const ReconstructionResult& r,
                              const PhotonStatistics* truth = nullptr);

}  // namespace pnr
