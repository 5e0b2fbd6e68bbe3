#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace irforge {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

// Writes to a temporary sibling and renames over the target, so readers
// never observe a partially written file.
void write_file_atomic(const fs::path& path, std::string_view content);

}  // namespace irforge
