#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pnr/config.hpp"

namespace pnr::detail {

/// Per-pixel recovery state of one simulated array. Times are integer ps.
class PixelArray {
 public:
  explicit PixelArray(const SimConfig& cfg)
      : cfg_(&cfg),
        eta_(cfg.detector.effective_eta()),
        rise_ps_(cfg.rise_time_ps),
        tau_ps_(cfg.recovery_tau_ns() * 1000.0),
        last_click_(static_cast<std::size_t>(cfg.detector.pixel_count), kNever) {}

  int pixels() const noexcept { return static_cast<int>(last_click_.size()); }

  double recovery(int pixel, std::int64_t t) const noexcept {
    const auto last = last_click_[static_cast<std::size_t>(pixel)];
    if (last == kNever) return 1.0;
    return cfg_->recovery_profile(static_cast<double>(t - last) * 1e-3);
  }

  /// Pixels whose last click is older than the rise time but younger than the
  /// full-recovery time. Clicks inside the rise window do not yet load the
  /// array, so simultaneous photons in one pulse see no penalty.
  int recovering(std::int64_t t) const noexcept {
    int k = 0;
    for (auto last : last_click_) {
      if (last == kNever) continue;
      const double age = static_cast<double>(t - last);
      if (age > rise_ps_ && age < tau_ps_) ++k;
    }
    return k;
  }

  double photon_probability(int pixel, std::int64_t t) const noexcept {
    const double r = recovery(pixel, t);
    if (r == 0.0) return 0.0;
    return eta_ * r * cfg_->penalty(recovering(t));
  }

  double dark_probability(int pixel, std::int64_t t) const noexcept { return recovery(pixel, t); }

  void click(int pixel, std::int64_t t) noexcept { last_click_[static_cast<std::size_t>(pixel)] = t; }

 private:
  static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();

  const SimConfig* cfg_;
  double eta_;
  double rise_ps_;
  double tau_ps_;
  std::vector<std::int64_t> last_click_;
};

}  // namespace pnr::detail
