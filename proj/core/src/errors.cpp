#include "pnr/errors.hpp"

namespace pnr {

const char* to_string(Error::Category category) noexcept {
  switch (category) {
    case Error::Category::Domain: return "domain";
    case Error::Category::Config: return "config";
    case Error::Category::Degenerate: return "degenerate";
    case Error::Category::Numeric: return "numeric";
    case Error::Category::Io: return "io";
  }
  return "unknown";
}

}  // namespace pnr
