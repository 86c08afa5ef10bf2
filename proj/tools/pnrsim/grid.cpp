#include "grid.hpp"

#include <string>

#include "pnr/calibration.hpp"
#include "pnr/confidence.hpp"
#include "pnr/errors.hpp"
#include "pnr/textio.hpp"

namespace pnrcli {

using pnr::ConfigError;
namespace textio = pnr::textio;

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> v;
  for (auto item : textio::split(text, ',')) {
    item = textio::trim(item);
    if (!item.empty()) v.push_back(textio::parse_double(item, what));
  }
  if (v.empty()) throw ConfigError(std::string(what) + ": empty list");
  return v;
}

std::vector<double> parse_grid(std::string_view text, std::string_view what) {
  const auto parts = textio::split(text, ':');
  if (parts.size() == 1) return parse_list(text, what);
  if (parts.size() != 3) throw ConfigError(std::string(what) + ": expected lo:hi:spec, got '" + std::string(text) + "'");
  const double lo = textio::parse_double(textio::trim(parts[0]), what);
  const double hi = textio::parse_double(textio::trim(parts[1]), what);
  auto spec = textio::trim(parts[2]);
  auto count = [&](std::string_view digits) {
    const auto n = textio::parse_int(digits, what);
    if (n < 1) throw ConfigError(std::string(what) + ": point count must be >= 1");
    return static_cast<int>(n);
  };
  if (spec.ends_with("/dec")) return pnr::rate_grid(lo, hi, count(spec.substr(0, spec.size() - 4)));
  if (spec.ends_with("log")) {
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError(std::string(what) + ": log grid needs 0 < lo < hi");
    return pnr::log_grid(lo, hi, count(spec.substr(0, spec.size() - 3)));
  }
  if (spec.ends_with("lin")) {
    const int n = count(spec.substr(0, spec.size() - 3));
    if (!(hi >= lo)) throw ConfigError(std::string(what) + ": lin grid needs lo <= hi");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
  }
  throw ConfigError(std::string(what) + ": grid spec must end in log, lin or /dec");
}

}  // namespace pnrcli
