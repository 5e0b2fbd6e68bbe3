#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace irforge {

class WorkspaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk layout of one workspace directory.
class Workspace {
 public:
  static constexpr const char* kMarker = "irforge-workspace.json";
  static constexpr int kLayoutVersion = 1;

  /// Creates the directory tree and marker (idempotent).
  static Workspace create(const std::filesystem::path& root);
  /// Throws WorkspaceError if the marker is missing or has another version.
  static Workspace open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path marker() const { return root_ / kMarker; }
  std::filesystem::path corpus() const { return root_ / "corpus.json"; }
  std::filesystem::path flags() const { return root_ / "flags.json"; }
  std::filesystem::path vocab() const { return root_ / "vocab.txt"; }
  std::filesystem::path build_info() const { return root_ / "build.json"; }
  std::filesystem::path cache() const { return root_ / "cache"; }
  std::filesystem::path checkpoints() const { return root_ / "checkpoints"; }
  std::filesystem::path reports() const { return root_ / "reports"; }
  std::filesystem::path archive() const { return reports() / "archive.json"; }
  std::filesystem::path validation() const { return reports() / "validation.json"; }
  std::filesystem::path search_config() const { return reports() / "search.json"; }
  std::filesystem::path default_apply_dir() const { return root_ / "apply"; }

  /// Fails with a hint naming the command that produces `path`.
  void require(const std::filesystem::path& path, const std::string& producer) const;

 private:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}
  std::filesystem::path root_;
};

}  // namespace irforge
