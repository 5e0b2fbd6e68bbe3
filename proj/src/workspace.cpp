#include "irforge/workspace.hpp"

#include "json.hpp"

#include "irforge/fsutil.hpp"

namespace irforge {

Workspace Workspace::create(const fs::path& root) {
  Workspace w(fs::absolute(root).lexically_normal());
  for (const auto& d : {w.root_, w.cache(), w.checkpoints(), w.reports()}) fs::create_directories(d);
  if (fs::exists(w.marker())) return open(root);
  nlohmann::json j = {{"format", "irforge-workspace"}, {"version", kLayoutVersion}};
  write_file_atomic(w.marker(), j.dump(2) + "\n");
  return w;
}

Workspace Workspace::open(const fs::path& root) {
  Workspace w(fs::absolute(root).lexically_normal());
  if (!fs::exists(w.marker()))
    throw WorkspaceError(w.root_.string() + " is not an irforge workspace (run `irforge build` first)");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(w.marker()));
  } catch (const std::exception& e) {
    throw WorkspaceError("unreadable workspace marker " + w.marker().string() + ": " + e.what());
  }
  if (j.value("format", "") != "irforge-workspace" || j.value("version", 0) != kLayoutVersion)
    throw WorkspaceError("unsupported workspace layout in " + w.marker().string());
  for (const auto& d : {w.cache(), w.checkpoints(), w.reports()}) fs::create_directories(d);
  return w;
}

void Workspace::require(const fs::path& path, const std::string& producer) const {
  if (!fs::exists(path)) throw WorkspaceError(path.string() + " is missing; run `irforge " + producer + "` first");
}

}  // namespace irforge
