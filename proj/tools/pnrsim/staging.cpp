#include "staging.hpp"

#include <unistd.h>

#include <algorithm>

#include "pnr/errors.hpp"

namespace pnrcli {

namespace fs = std::filesystem;

StagedOutputs::StagedOutputs(fs::path out_dir) : out_dir_(std::move(out_dir)) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw pnr::IoError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
  staging_ = out_dir_ / (".pnrsim-staging-" + std::to_string(::getpid()));
  fs::remove_all(staging_, ec);
  fs::create_directories(staging_, ec);
  if (ec) throw pnr::IoError("cannot create staging directory " + staging_.string() + ": " + ec.message());
}

StagedOutputs::~StagedOutputs() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

std::ofstream StagedOutputs::open(const std::string& name) {
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
  std::ofstream f(staging_ / name, std::ios::binary | std::ios::trunc);
  if (!f) throw pnr::IoError("cannot open " + (staging_ / name).string() + " for writing");
  return f;
}

std::vector<std::string> StagedOutputs::final_paths() const {
  std::vector<std::string> out;
  for (const auto& n : names_) out.push_back((out_dir_ / n).string());
  return out;
}

void StagedOutputs::commit() {
  for (const auto& n : names_) {
    std::error_code ec;
    fs::rename(staging_ / n, out_dir_ / n, ec);
    if (ec) throw pnr::IoError("cannot move " + n + " into " + out_dir_.string() + ": " + ec.message());
  }
  committed_ = true;
}

}  // namespace pnrcli
