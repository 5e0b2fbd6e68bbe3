#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "irforge/compile.hpp"
#include "irforge/process.hpp"

namespace testing {

namespace fs = std::filesystem;

irforge::Toolchain toolchain();
fs::path fixtures();
fs::path corpus20();
fs::path cli();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "irforge-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

// Runs the irforge binary; toolchain env vars point at the test toolchain.
irforge::ProcessResult run_cli(const std::vector<std::string>& args);

// Writes a file list of pass-name globs (one per line).
void write_patterns(const fs::path& file, const std::vector<std::string>& names);

// Passes with a visible effect on small programs, used as a reduced catalog.
const std::vector<std::string>& reduced_catalog();

std::size_t count_substr(const std::string& text, const std::string& needle);

}  // namespace testing
