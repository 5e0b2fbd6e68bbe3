#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace irforge {

struct RunOptions {
  std::filesystem::path cwd;
  double timeout_seconds = 0;           // 0 = no limit
  std::size_t memory_limit_bytes = 0;   // 0 = no limit (RLIMIT_AS)
  std::optional<std::string> stdin_data;
};

struct ProcessResult {
  enum class Status { Exited, Signaled, TimedOut, SpawnFailed };
  Status status = Status::SpawnFailed;
  int exit_code = -1;
  int signal = 0;
  std::string out;
  std::string err;
  double wall_time = 0;

  bool ok() const { return status == Status::Exited && exit_code == 0; }
};

// Runs argv[0] (PATH lookup) in its own process group. On timeout the whole
// group is killed.
ProcessResult run_process(const std::vector<std::string>& argv, const RunOptions& options = {});

/// Resolves a program name against PATH; absolute/relative paths pass through
/// when they exist.
std::optional<std::filesystem::path> find_executable(const std::string& name);

}  // namespace irforge
