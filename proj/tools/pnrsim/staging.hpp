#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pnrcli {

/// Output files are written into a hidden staging directory under the output
/// directory and moved into place only by commit(). If the command fails the
/// staging directory is removed, so no partial files are left behind.
class StagedOutputs {
 public:
  explicit StagedOutputs(std::filesystem::path out_dir);
  ~StagedOutputs();
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;

  std::ofstream open(const std::string& name);
  /// Final paths of all files opened so far.
  std::vector<std::string> final_paths() const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  void commit();

 private:
  std::filesystem::path out_dir_;
  std::filesystem::path staging_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

}  // namespace pnrcli
