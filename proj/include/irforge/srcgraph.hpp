#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "irforge/cfg.hpp"

namespace irforge {

struct SrcToken {
  std::string text;
  std::size_t line = 0;
  bool ident = false;
};

/// Strips comments, preprocessor lines, string and character literals
/// (each literal becomes one placeholder token).
std::vector<SrcToken> tokenize_c(std::string_view source);

/// Statement-level CFG for a C subset. Straight-line statements merge into
/// one node; a node containing a call is labeled Call. Throws ParseError on
/// unbalanced braces or parentheses.
Cfg source_cfg(std::string_view source);

}  // namespace irforge
