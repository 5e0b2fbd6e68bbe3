#pragma once

#include <cstdint>
#include <filesystem>

namespace testing {

// Three structurally distinct program families, 20 members each, with
// randomized identifiers and constants: accumulating loops, recursive
// descent, and switch-driven state machines.
void write_toy_corpus(const std::filesystem::path& root, std::uint64_t seed = 7);

}  // namespace testing
