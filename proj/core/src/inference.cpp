#include "pnr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "pnr/errors.hpp"
#include "pnr/rng.hpp"
#include "pnr/textio.hpp"

namespace pnr {

ClickStatistics ClickStatistics::analytic(std::vector<double> probs) {
  if (probs.empty()) throw DomainError("click statistics: empty vector");
  for (double v : probs) {
    if (!(v >= 0.0 && v <= 1.0 + 1e-12)) throw DomainError("click statistics: entry outside [0,1]");
  }
  ClickStatistics q;
  q.probs_ = std::move(probs);
  return q;
}

ClickStatistics ClickStatistics::from_counts(std::span<const std::uint64_t> counts) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw DegenerateInputError("click statistics: no events recorded");
  ClickStatistics q;
  q.probs_.resize(counts.size());
  for (std::size_t n = 0; n < counts.size(); ++n) {
    q.probs_[n] = static_cast<double>(counts[n]) / static_cast<double>(total);
  }
  q.sample_count_ = total;
  return q;
}

double ClickStatistics::at(int n) const noexcept {
  if (n < 0 || n >= static_cast<int>(probs_.size())) return 0.0;
  return probs_[static_cast<std::size_t>(n)];
}

double ClickStatistics::mean() const noexcept {
  double acc = 0.0;
  for (std::size_t n = 0; n < probs_.size(); ++n) acc += static_cast<double>(n) * probs_[n];
  return acc;
}

ClickStatistics forward(const ResponseMatrix& p, const PhotonStatistics& s, ColumnPolicy policy) {
  if (s.size() > p.cols()) {
    bool tail_is_zero = true;
    for (std::size_t m = p.cols(); m < s.size(); ++m) tail_is_zero = tail_is_zero && s[m] == 0.0;
    if (!tail_is_zero && policy == ColumnPolicy::Strict) {
      throw DomainError("forward: statistics extend to m=" + std::to_string(s.m_max()) +
                        " but the response matrix stops at m=" + std::to_string(p.m_max()));
    }
  }
  const int m_top = std::min(p.m_max(), s.m_max());
  std::vector<double> q(p.rows(), 0.0);
  for (int n = 0; n <= p.n_max(); ++n) {
    double acc = 0.0;
    for (int m = n; m <= m_top; ++m) acc += p(n, m) * s[static_cast<std::size_t>(m)];
    q[static_cast<std::size_t>(n)] = acc;
  }
  return ClickStatistics::analytic(std::move(q));
}

InversionResult invert_triangular(const ResponseMatrix& p, const ClickStatistics& q) {
  if (q.size() == 0) throw DomainError("invert_triangular: empty click statistics");
  int k = std::min({q.n_max(), p.n_max(), p.m_max()});
  for (int n = k + 1; n <= q.n_max(); ++n) {
    if (q.at(n) != 0.0) {
      throw DomainError("invert_triangular: click statistics populate n=" + std::to_string(n) +
                        " beyond the response matrix");
    }
  }
  std::vector<double> raw(static_cast<std::size_t>(k) + 1, 0.0);
  for (int m = k; m >= 0; --m) {
    const double pivot = p(m, m);
    if (pivot == 0.0) {
      throw SingularSystemError("invert_triangular: zero diagonal entry P_" + std::to_string(m) +
                                std::to_string(m));
    }
    double acc = q.at(m);
    for (int j = m + 1; j <= k; ++j) acc -= p(m, j) * raw[static_cast<std::size_t>(j)];
    raw[static_cast<std::size_t>(m)] = acc / pivot;
  }

  InversionResult out;
  out.raw = raw;
  std::vector<double> clipped(raw.size());
  double positive = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0.0) {
      out.clipped_mass += -raw[i];
      clipped[i] = 0.0;
    } else {
      clipped[i] = raw[i];
      positive += raw[i];
    }
  }
  if (!(positive > 0.0)) throw DegenerateInputError("invert_triangular: reconstruction has no positive mass");
  for (double& v : clipped) v /= positive;
  out.s_hat = PhotonStatistics::custom(std::move(clipped));
  return out;
}

MinimizeResult golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                       double x_tolerance, int max_iterations) {
  if (!(hi >= lo)) throw DomainError("golden section: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fa = f(a), fb = f(b), fc = f(c), fd = f(d);

  double best_x = a, best_f = fa;
  auto note = [&](double x, double fx) {
    if (fx < best_f) {
      best_x = x;
      best_f = fx;
    }
  };
  note(b, fb);
  note(c, fc);
  note(d, fd);

  int it = 0;
  while (b - a > x_tolerance) {
    if (it >= max_iterations) {
      throw ConvergenceError("golden section: no convergence after " + std::to_string(it) +
                                 " iterations",
                             best_x, best_f);
    }
    ++it;
    if (fc <= fd) {
      b = d;
      fb = fd;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      note(c, fc);
    } else {
      a = c;
      fa = fc;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      note(d, fd);
    }
    if (best_x < a || best_x > b) {
      throw ConvergenceError("golden section: objective is not unimodal on the bracket", best_x,
                             best_f);
    }
  }
  return {best_x, best_f, it};
}

namespace {

double forward_objective(const ResponseMatrix& p, const ClickStatistics& q, double mu) {
  auto model = forward(p, poisson(mu, p.m_max()));
  const std::size_t n = std::max(model.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = model.at(static_cast<int>(i)) - q.at(static_cast<int>(i));
    acc += d * d;
  }
  return acc;
}

double statistics_objective(const PhotonStatistics& s, double mu) {
  auto model = poisson(mu, s.m_max());
  double acc = 0.0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    double d = model[m] - s[m];
    acc += d * d;
  }
  return acc;
}

}  // namespace

ReconstructionResult fit_poisson_mu(const ResponseMatrix& p, const ClickStatistics& q,
                                    const FitOptions& options) {
  const double eta_eff = p.at(1, 1);
  if (!(eta_eff > 0.0)) throw SingularSystemError("fit_poisson_mu: response matrix has P_11 = 0");

  ReconstructionResult r;
  const double hi = 2.0 * q.mean() / eta_eff + 1.0;
  auto direct = golden_section_minimize([&](double mu) { return forward_objective(p, q, mu); }, 0.0,
                                        hi, options.mu_tolerance, options.max_iterations);
  r.mu_fit = direct.x;
  r.forward_residual = direct.value;
  r.iterations = direct.iterations;

  auto inv = invert_triangular(p, q);
  r.s_hat = inv.s_hat;
  r.clipped_mass = inv.clipped_mass;
  const double hi_inv = 2.0 * mean(r.s_hat) + 1.0;
  auto via_inverse = golden_section_minimize(
      [&](double mu) { return statistics_objective(r.s_hat, mu); }, 0.0, hi_inv,
      options.mu_tolerance, options.max_iterations);
  r.mu_fit_inverted = via_inverse.x;
  r.fit_residual = statistics_objective(r.s_hat, r.mu_fit);
  return r;
}

double mu_fit_stddev(const ResponseMatrix& p, double mu, std::uint64_t shots) {
  if (shots == 0) return 0.0;
  const double h = 1e-5 * std::max(mu, 1.0);
  const double lo = std::max(0.0, mu - h);
  const double hi = mu + h;
  auto q = forward(p, poisson(mu, p.m_max()));
  auto ql = forward(p, poisson(lo, p.m_max()));
  auto qh = forward(p, poisson(hi, p.m_max()));
  std::vector<double> jac(q.size());
  for (std::size_t n = 0; n < q.size(); ++n) jac[n] = (qh[n] - ql[n]) / (hi - lo);

  double jj = 0.0, jq = 0.0, jdj = 0.0;
  for (std::size_t n = 0; n < q.size(); ++n) {
    jj += jac[n] * jac[n];
    jq += jac[n] * q[n];
    jdj += jac[n] * jac[n] * q[n];
  }
  if (!(jj > 0.0)) throw NumericError("mu_fit_stddev: model is insensitive to mu");
  const double var = (jdj - jq * jq) / static_cast<double>(shots) / (jj * jj);
  return std::sqrt(std::max(0.0, var));
}

std::vector<std::uint64_t> sample_counts(const ClickStatistics& q, std::uint64_t shots,
                                         std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> cdf(q.size());
  std::partial_sum(q.probs().begin(), q.probs().end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0)) throw DegenerateInputError("sample_counts: click statistics carry no mass");
  std::vector<std::uint64_t> counts(q.size(), 0);
  CounterRng rng(seed, stream ^ 0x4d554c54ULL, 0);
  for (std::uint64_t i = 0; i < shots; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

void write_click_csv(std::ostream& out, const ClickStatistics& q) {
  out << "n,q\n";
  for (std::size_t n = 0; n < q.size(); ++n) out << n << ',' << textio::format_double(q[n]) << '\n';
}

std::string to_json_text(const ReconstructionResult& r) {
  nlohmann::ordered_json j;
  j["mu_fit"] = r.mu_fit;
  j["mu_fit_inverted"] = r.mu_fit_inverted;
  j["fit_residual"] = r.fit_residual;
  j["forward_residual"] = r.forward_residual;
  j["clipped_mass"] = r.clipped_mass;
  j["iterations"] = r.iterations;
  j["s_hat"] = std::vector<double>(r.s_hat.probs().begin(), r.s_hat.probs().end());
  return j.dump(2);
}

void write_reconstruction_csv(std::ostream& out, const ReconstructionResult& r,
                              const PhotonStatistics* truth) {
  auto fitted = poisson(r.mu_fit, r.s_hat.m_max());
  out << "m,s_hat,poisson_fit";
  if (truth) out << ",s_true";
  out << '\n';
  for (std::size_t m = 0; m < r.s_hat.size(); ++m) {
    out << m << ',' << textio::format_double(r.s_hat[m]) << ',' << textio::format_double(fitted[m]);
    if (truth) out << ',' << textio::format_double(truth->at(static_cast<int>(m)));
    out << '\n';
  }
}

}  // namespace pnr
