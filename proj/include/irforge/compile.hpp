#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "irforge/corpus.hpp"
#include "irforge/flag_vector.hpp"

namespace irforge {

class ToolchainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Toolchain {
  std::filesystem::path cc;   // frontend (clang)
  std::filesystem::path opt;  // standalone IR optimizer
  std::string version;        // identifies both binaries; part of every cache key
  std::vector<std::string> frontend_flags{"-S", "-emit-llvm", "-O0", "-Xclang", "-disable-O0-optnone", "-g0"};
  double baseline_timeout = 30;
  double optimize_timeout = 60;
  std::size_t memory_limit = std::size_t{4} << 30;

  /// IRFORGE_CC / IRFORGE_OPT, falling back to clang and opt/irforge-opt on
  /// PATH (and next to `self_dir`, when given). Throws ToolchainError with a
  /// remediation hint when either binary cannot be found.
  static Toolchain resolve(const std::optional<std::filesystem::path>& self_dir = std::nullopt);
  static Toolchain from_paths(std::filesystem::path cc, std::filesystem::path opt);
};

enum class PassKind { Module, Cgscc, Function, Loop };

struct Flag {
  std::string name;  // "-mem2reg"
  PassKind kind = PassKind::Function;
};

struct FlagCatalog {
  std::vector<Flag> flags;
  std::string platform;
  std::string toolchain_version;

  std::size_t size() const { return flags.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// New-pass-manager pipeline for the enabled flags, in catalog order.
  std::string pipeline(const FlagVector& v) const;
  std::string digest() const;

  nlohmann::json to_json() const;
  static FlagCatalog from_json(const nlohmann::json& j);
};

// Glob patterns (fnmatch) over bare pass names, e.g. "print*".
struct FlagFilter {
  std::vector<std::string> allow;  // empty = allow everything
  std::vector<std::string> deny;

  static FlagFilter defaults();
  bool admits(std::string_view name) const;
  static std::vector<std::string> read_patterns(const std::filesystem::path& file);
};

/// Lists transform passes reported by `opt -print-passes`, filtered.
FlagCatalog enumerate_flags(const Toolchain& tc, const FlagFilter& filter = FlagFilter::defaults());

enum class Producer { Baseline, Optimized };

struct IrText {
  std::string text;
  Producer producer = Producer::Baseline;
  std::string genome;  // bit string for optimized IR
  std::string program_id;
  std::string digest;  // SHA-256 of text
};

enum class CompileStatus { Ok, CompileError, Timeout };
const char* to_string(CompileStatus s);

struct CompileOutcome {
  CompileStatus status = CompileStatus::CompileError;
  std::optional<IrText> ir;  // present iff status == Ok
  std::string stderr_excerpt;
  double wall_time = 0;
  bool cache_hit = false;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t verified = 0;
  std::size_t mismatches = 0;
};

struct CompilerOptions {
  bool verify_cache = false;  // recompile ~1% of hits and compare digests
  bool use_cache = true;
};

/// Drops the `; ModuleID = ...` comment, which names whichever file the tool
/// happened to read and carries no program content.
std::string normalize_ir(std::string_view text);

// Content-addressed compile driver. Entries live at
// cache/<kk>/<key>.ll with a <key>.json sidecar; the sidecar is published
// last and marks the entry committed. Safe to call from multiple threads.
class Compiler {
 public:
  Compiler(Toolchain tc, std::filesystem::path cache_dir, CompilerOptions options = {});

  const Toolchain& toolchain() const { return tc_; }

  CompileOutcome compile_baseline(const ProgramRecord& program);
  CompileOutcome optimize(const IrText& ir, const FlagVector& v, const FlagCatalog& catalog);

  CacheStats stats() const;

 private:
  struct Entry {
    CompileStatus status;
    std::string text;
    std::string stderr_excerpt;
  };
  std::optional<Entry> load(const std::string& key) const;
  void store(const std::string& key, const Entry& e, const nlohmann::json& meta) const;
  std::mutex& stripe(const std::string& key);

  CompileOutcome run_baseline(const ProgramRecord& program) const;
  CompileOutcome run_optimize(const IrText& ir, const std::string& pipeline) const;

  Toolchain tc_;
  std::filesystem::path cache_dir_;
  CompilerOptions options_;
  std::mutex stripes_[64];
  std::atomic<std::size_t> hits_{0}, misses_{0}, verified_{0}, mismatches_{0};
};

}  // namespace irforge
