#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "irforge/compile.hpp"
#include "irforge/irgraph.hpp"
#include "irforge/kernel.hpp"
#include "irforge/vocab.hpp"

namespace irforge {

// Source-side graph policy when the C-subset parser cannot be used.
enum class SrcProxy {
  Fallback,  // parse the source; on failure (or C++) use the -O0 IR graph
  Always,    // always compare against the -O0 IR graph
  Off,       // parse failures quarantine the program
};
const char* to_string(SrcProxy p);
std::optional<SrcProxy> parse_src_proxy(std::string_view s);

enum class VocabScope { Corpus, Program };

struct FitnessConfig {
  KernelOptions kernel;
  OovOptions oov;
  SrcProxy src_proxy = SrcProxy::Fallback;
  VocabScope vocab_scope = VocabScope::Corpus;
  bool function_pairs = false;  // mean per-function similarity instead of whole-module
};

struct ProgramScore {
  std::string program_id;
  double sim_g = 0;
  std::size_t oov_base = 0;
  std::size_t oov_opt = 0;
  double oov_multiplier = 0;
  double score = 0;
  std::string status = "ok";  // ok | compile_error | timeout | parse_error | quarantined
  bool quarantined = false;
  bool source_proxied = false;

  nlohmann::json to_json() const;
};

struct FitnessReport {
  std::string genome;
  std::vector<ProgramScore> per_program;  // validation-set order
  double aggregate = 0;                   // mean over non-quarantined programs
  std::size_t failures = 0;
  std::size_t quarantined = 0;

  nlohmann::json to_json() const;
  std::string to_tsv() const;
};

struct PreparedProgram {
  const ProgramRecord* record = nullptr;
  bool quarantined = false;
  std::string quarantine_reason;
  std::optional<IrText> baseline;
  IrModule base_module;
  SpGraph source_graph;
  std::map<std::string, SpGraph> source_functions;
  bool source_proxied = false;
  OovCount base_oov;
  std::shared_ptr<const Vocabulary> own_vocab;  // VocabScope::Program
};

// Evaluates flag vectors over a fixed program set. Memoizes per
// (program, genome) and per (program, optimized-IR digest). Thread-safe.
class FitnessEvaluator {
 public:
  FitnessEvaluator(Compiler& compiler, const FlagCatalog& catalog, const Vocabulary& vocab, FitnessConfig config = {});

  /// Compiles baselines and builds source graphs (parallel over programs).
  void prepare(const std::vector<const ProgramRecord*>& programs);

  const std::vector<PreparedProgram>& programs() const { return programs_; }
  const FitnessConfig& config() const { return config_; }

  ProgramScore program_fitness(std::size_t index, const FlagVector& v);
  FitnessReport sequence_fitness(const FlagVector& v);
  /// All (genome, program) pairs fan out over one worker pool.
  std::vector<FitnessReport> evaluate_batch(const std::vector<FlagVector>& genomes);

  /// Optimized IR for a prepared program, or nullopt on failure.
  std::optional<IrText> optimized_ir(std::size_t index, const FlagVector& v, CompileStatus* status = nullptr);

  std::size_t memo_hits() const { return memo_hits_; }

 private:
  ProgramScore compute(std::size_t index, const FlagVector& v);
  double graph_similarity(const PreparedProgram& p, const IrModule& m) const;
  FitnessReport assemble(const FlagVector& v, std::vector<ProgramScore> scores) const;

  Compiler& compiler_;
  const FlagCatalog& catalog_;
  const Vocabulary& vocab_;
  FitnessConfig config_;
  std::vector<PreparedProgram> programs_;

  struct IrResult {
    double sim_g;
    OovCount oov;
  };
  std::mutex memo_mutex_;
  std::map<std::pair<std::size_t, std::string>, ProgramScore> by_genome_;
  std::map<std::pair<std::size_t, std::string>, IrResult> by_ir_;
  std::size_t memo_hits_ = 0;
};

/// Mean of the given scores; 0 for an empty list.
double aggregate_scores(const std::vector<ProgramScore>& scores);

}  // namespace irforge
