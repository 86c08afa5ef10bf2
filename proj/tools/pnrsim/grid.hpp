#pragma once

#include <string_view>
#include <vector>

namespace pnrcli {

/// "lo:hi:Nlog", "lo:hi:Nlin", "lo:hi:K/dec" (K points per decade) or a
/// comma-separated list.
std::vector<double> parse_grid(std::string_view text, std::string_view what);

std::vector<double> parse_list(std::string_view text, std::string_view what);

}  // namespace pnrcli
