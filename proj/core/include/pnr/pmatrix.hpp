#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pnr {

enum class ModelTag { Multiplexed, Intrinsic, BSArray };

std::string_view to_string(ModelTag tag) noexcept;

/// Static detector description shared by the analytic models and the
/// Monte Carlo simulator.
struct DetectorConfig {
  int pixel_count = 28;
  double eta = 0.88;              // single-photon efficiency in [0,1]
  double splitter_loss_db = 0.0;  // optical insertion loss in front of the array
  double dark_count_rate = 0.0;   // counts/s; only the simulator uses it

  /// eta * 10^(-loss/10).
  double effective_eta() const noexcept;
  /// Throws ConfigError if any field is out of range.
  void validate() const;
};

/// P_nm = Pr(n clicks | m photons), rows n = 0..n_max, columns m = 0..m_max.
/// Entries with n > m are structural zeros.
class ResponseMatrix {
 public:
  ResponseMatrix(int n_max, int m_max, ModelTag tag);

  int n_max() const noexcept { return n_max_; }
  int m_max() const noexcept { return m_max_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(n_max_) + 1; }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(m_max_) + 1; }
  ModelTag model() const noexcept { return tag_; }

  double operator()(int n, int m) const noexcept {
    return data_[static_cast<std::size_t>(n) * cols() + static_cast<std::size_t>(m)];
  }
  double& operator()(int n, int m) noexcept {
    return data_[static_cast<std::size_t>(n) * cols() + static_cast<std::size_t>(m)];
  }
  /// Zero outside the stored block.
  double at(int n, int m) const noexcept;

  std::span<const double> row(int n) const noexcept {
    return {data_.data() + static_cast<std::size_t>(n) * cols(), cols()};
  }
  std::vector<double> column(int m) const;

 private:
  int n_max_;
  int m_max_;
  ModelTag tag_;
  std::vector<double> data_;
};

/// Pr(exactly n of N pixels hit | k photons land independently and uniformly),
/// n = 0..N. Stable Markov-chain recurrence, O(k*N).
std::vector<double> occupancy_distribution(int k, int pixels);

/// Same quantity from the alternating inclusion-exclusion sum. Only valid for
/// pixels <= 10 (cancellation); used to cross-check the recurrence.
std::vector<double> occupancy_inclusion_exclusion(int k, int pixels);

/// Binomial(k; m, p) pmf with exact handling of p in {0, 1}.
double binomial_pmf(int k, int m, double p);

/// Spatially multiplexed array: photons thinned by effective_eta(), survivors
/// land uniformly on the pixels, clicks = number of occupied pixels.
/// n_max defaults to min(N, m_max); asking for more than N clicks is a
/// ConfigError.
ResponseMatrix build_multiplexed(const DetectorConfig& cfg, int m_max,
                                 std::optional<int> n_max = std::nullopt);

/// Binomial loss model, P_nm = C(m,n) eta^n (1-eta)^(m-n). Square.
ResponseMatrix build_intrinsic(double eta, int m_max);

/// Balanced 1:N splitter in front of N single-pixel detectors. Same combinatorics
/// as build_multiplexed, tagged BSArray.
ResponseMatrix build_bs_array(int detector_count, double eta, double splitter_loss_db,
                              int m_max, std::optional<int> n_max = std::nullopt);

/// Diagonal [P_00, ..., P_{n_max n_max}].
std::vector<double> n_photon_efficiencies(const ResponseMatrix& p, int n_max);

/// N!/(N-n)! * (eta/N)^n.
double multiplexed_diagonal(int pixels, double eta, int n);

/// Header "m=0,m=1,...", then one row per n, round-trip precision.
void write_matrix_csv(std::ostream& out, const ResponseMatrix& p);
ResponseMatrix read_matrix_csv(std::istream& in, ModelTag tag);

}  // namespace pnr
