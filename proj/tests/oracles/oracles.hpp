#pragma once

// Independent reference implementations used only by the tests. None of these
// call into pnr_core.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// (N+1)^m enumeration: each photon is lost or lands on one of N pixels.
inline double enumerate_pnm(int pixels, double eta, int n, int m) {
  std::vector<int> slot(static_cast<std::size_t>(m), 0);
  double total = 0.0;
  for (;;) {
    double p = 1.0;
    std::uint64_t mask = 0;
    for (int s : slot) {
      if (s == 0) {
        p *= 1.0 - eta;
      } else {
        p *= eta / pixels;
        mask |= std::uint64_t{1} << s;
      }
    }
    if (__builtin_popcountll(mask) == n) total += p;
    int i = 0;
    for (; i < m; ++i) {
      if (++slot[static_cast<std::size_t>(i)] <= pixels) break;
      slot[static_cast<std::size_t>(i)] = 0;
    }
    if (i == m) break;
  }
  return total;
}

inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Stirling numbers of the second kind S(k, j), j = 0..k.
inline std::vector<std::vector<double>> stirling2(int k_max) {
  std::vector<std::vector<double>> s(static_cast<std::size_t>(k_max) + 1,
                                     std::vector<double>(static_cast<std::size_t>(k_max) + 1, 0.0));
  s[0][0] = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    for (int j = 1; j <= k; ++j) {
      s[k][j] = j * s[k - 1][j] + s[k - 1][j - 1];
    }
  }
  return s;
}

/// Closed form: sum_k Binom(k; m, eta) * C(N, n) n! S(k, n) / N^k.
inline double stirling_pnm(int pixels, double eta, int n, int m) {
  static const auto s = stirling2(80);
  if (n > pixels || n > m) return 0.0;
  double total = 0.0;
  for (int k = n; k <= m; ++k) {
    const double pk = binom(m, k) * std::pow(eta, k) * std::pow(1.0 - eta, m - k);
    // C(N,n) n! / N^k = prod_{i<n} (N-i) / N^k
    double falling = 1.0;
    for (int i = 0; i < n; ++i) falling *= static_cast<double>(pixels - i);
    total += pk * falling * s[k][n] / std::pow(static_cast<double>(pixels), k);
  }
  return total;
}

/// Monte Carlo estimate of Pr(m = n | n clicks) for a thermal source on an
/// N-pixel array, using std::mt19937_64.
struct McConfidence {
  double value;
  double stderr_;
};

inline McConfidence mc_confidence_thermal(int pixels, double eta, double mu, int n, std::uint64_t trials,
                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::geometric_distribution<int> photons(1.0 / (1.0 + mu));
  std::bernoulli_distribution detect(eta);
  std::uniform_int_distribution<int> pixel(0, pixels - 1);
  std::uint64_t clicks_n = 0, right = 0;
  std::vector<char> hit(static_cast<std::size_t>(pixels));
  for (std::uint64_t t = 0; t < trials; ++t) {
    const int m = photons(gen);
    std::fill(hit.begin(), hit.end(), 0);
    int clicks = 0;
    for (int i = 0; i < m; ++i) {
      if (!detect(gen)) continue;
      auto& h = hit[static_cast<std::size_t>(pixel(gen))];
      if (!h) {
        h = 1;
        ++clicks;
      }
    }
    if (clicks == n) {
      ++clicks_n;
      if (m == n) ++right;
    }
  }
  const double p = clicks_n ? static_cast<double>(right) / static_cast<double>(clicks_n) : 0.0;
  const double se = clicks_n ? std::sqrt(p * (1.0 - p) / static_cast<double>(clicks_n)) : 1.0;
  return {p, se};
}

/// Pearson chi-square statistic of observed counts against probabilities,
/// pooling cells with expectation below 5 into one.
inline double chi_square(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs,
                         int* dof) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  double chi = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double e = probs[i] * static_cast<double>(total);
    const double o = i < counts.size() ? static_cast<double>(counts[i]) : 0.0;
    if (e < 5.0) {
      pooled_obs += o;
      pooled_exp += e;
      continue;
    }
    chi += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    chi += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  *dof = cells - 1;
  return chi;
}

}  // namespace oracle
