#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "irforge/irgraph.hpp"

namespace irforge::embed {

// Sparse view of a d-dimensional vector; indices strictly increasing.
struct SparseVec {
  std::size_t dim = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::vector<double> dense() const;
  double norm() const;
};

struct HashingConfig {
  std::size_t dim = 2048;
  std::uint64_t seed = 0x1f0e5eedULL;
};

/// Signed feature hashing of a token bag, L2-normalized (zero stays zero).
SparseVec hash_tokens(const std::vector<std::string>& tokens, const HashingConfig& cfg = {});

/// Source tokens (comments, strings, preprocessor stripped) plus adjacent
/// token bigrams.
std::vector<std::string> source_tokens(std::string_view source);
/// Canonical statements of every block.
std::vector<std::string> ir_tokens(const IrModule& m);

SparseVec featurize_source(std::string_view source, const HashingConfig& cfg = {});
SparseVec featurize_ir(const IrModule& m, const HashingConfig& cfg = {});

/// Parallel featurization of many sources; output order follows input.
std::vector<SparseVec> featurize_sources(const std::vector<std::string>& sources, const HashingConfig& cfg = {});
std::vector<SparseVec> featurize_sources_serial(const std::vector<std::string>& sources, const HashingConfig& cfg = {});

}  // namespace irforge::embed
