#pragma once

#include <iosfwd>

namespace pnrcli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kNumericError = 3,
  kDegenerateInput = 4,
  kSelfTestFailed = 5,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnrcli
