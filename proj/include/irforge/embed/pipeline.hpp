#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irforge/embed/features.hpp"
#include "irforge/embed/metrics.hpp"
#include "irforge/embed/triplet.hpp"

namespace irforge::embed {

enum class EvalMode { Src, SrcO0, SrcTopk };
const char* to_string(EvalMode m);
std::optional<EvalMode> parse_eval_mode(std::string_view s);

struct EvalItem {
  std::string id;
  std::string label;
  bool test = false;
  SparseVec source;
  std::vector<SparseVec> irs;  // IR views used as extra anchors
};

struct EvalConfig {
  std::uint64_t seed = 1;
  std::size_t out = 128;
  double margin = 0.5;
  std::size_t source_triplets_per_program = 4;
  TrainConfig train;
};

struct EvalOutcome {
  EvalMode mode = EvalMode::Src;
  RetrievalResult retrieval;
  std::size_t source_triplets = 0;
  std::size_t ir_triplets = 0;
  double initial_loss = 0;
  double final_loss = 0;
  std::size_t test_items = 0;
  std::vector<std::string> excluded_classes;  // fewer than two test members
};

/// Source triplets (anchor and positive share a class, negative from another
/// class) plus, outside Src mode, one triplet per IR view: anchor the IR,
/// positive the program's own source, negative a source from another class.
/// The two kinds draw from separate RNG streams so the source triplets are
/// identical across modes. Retrieval is scored on test-split sources.
EvalOutcome run_eval(const std::vector<EvalItem>& items, EvalMode mode, const EvalConfig& cfg);

}  // namespace irforge::embed
