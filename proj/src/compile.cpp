#include "irforge/compile.hpp"

#include <fnmatch.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "irforge/digest.hpp"
#include "irforge/fsutil.hpp"
#include "irforge/log.hpp"
#include "irforge/process.hpp"

namespace irforge {

namespace {

constexpr std::size_t kStderrExcerpt = 2000;

std::string first_line(const std::string& s) {
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    return line.substr(b, e - b + 1);
  }
  return {};
}

std::string excerpt(const std::string& s) {
  if (s.size() <= kStderrExcerpt) return s;
  return s.substr(0, kStderrExcerpt) + "\n[truncated]";
}

std::string tool_version(const fs::path& exe) {
  auto r = run_process({exe.string(), "--version"}, {.timeout_seconds = 30});
  if (!r.ok()) throw ToolchainError("cannot query version of " + exe.string());
  return first_line(r.out);
}

const char* kind_name(PassKind k) {
  switch (k) {
    case PassKind::Module: return "module";
    case PassKind::Cgscc: return "cgscc";
    case PassKind::Function: return "function";
    case PassKind::Loop: return "loop";
  }
  return "function";
}

PassKind kind_from_name(std::string_view s) {
  if (s == "module") return PassKind::Module;
  if (s == "cgscc") return PassKind::Cgscc;
  if (s == "loop") return PassKind::Loop;
  return PassKind::Function;
}

class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& base) {
    static std::atomic<unsigned long> counter{0};
    auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    path_ = base / ("w" + std::to_string(::getpid()) + "_" + std::to_string(tid % 100000) + "_" +
                    std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

CompileOutcome outcome_from_process(const ProcessResult& r, const fs::path& output) {
  CompileOutcome out;
  out.wall_time = r.wall_time;
  out.stderr_excerpt = excerpt(r.err);
  if (r.status == ProcessResult::Status::TimedOut) {
    out.status = CompileStatus::Timeout;
    return out;
  }
  if (!r.ok()) {
    out.status = CompileStatus::CompileError;
    if (out.stderr_excerpt.empty()) {
      out.stderr_excerpt = r.status == ProcessResult::Status::Signaled
                               ? "terminated by signal " + std::to_string(r.signal)
                               : "exit code " + std::to_string(r.exit_code);
    }
    return out;
  }
  std::error_code ec;
  if (!fs::exists(output, ec)) {
    out.status = CompileStatus::CompileError;
    out.stderr_excerpt = "no output produced";
    return out;
  }
  IrText ir;
  ir.text = normalize_ir(read_file(output));
  ir.digest = sha256_hex(ir.text);
  out.ir = std::move(ir);
  out.status = CompileStatus::Ok;
  return out;
}

}  // namespace

const char* to_string(CompileStatus s) {
  switch (s) {
    case CompileStatus::Ok: return "ok";
    case CompileStatus::CompileError: return "compile_error";
    case CompileStatus::Timeout: return "timeout";
  }
  return "compile_error";
}

std::string normalize_ir(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.rfind("; ModuleID = ", 0) != 0) out.append(line);
    text.remove_prefix(line.size());
  }
  return out;
}

// --- Toolchain --------------------------------------------------------------

Toolchain Toolchain::from_paths(fs::path cc, fs::path opt) {
  Toolchain tc;
  tc.cc = std::move(cc);
  tc.opt = std::move(opt);
  tc.version = "cc=" + tool_version(tc.cc) + "; opt=" + tool_version(tc.opt);
  return tc;
}

Toolchain Toolchain::resolve(const std::optional<fs::path>& self_dir) {
  auto from_env = [](const char* var) -> std::optional<fs::path> {
    const char* v = std::getenv(var);
    if (!v || !*v) return std::nullopt;
    auto p = find_executable(v);
    if (!p) throw ToolchainError(std::string(var) + "=" + v + " is not an executable");
    return p;
  };
  auto cc = from_env("IRFORGE_CC");
  if (!cc) cc = find_executable("clang-14");
  if (!cc) cc = find_executable("clang");
  if (!cc)
    throw ToolchainError("no C frontend found; set IRFORGE_CC to a clang binary (e.g. export IRFORGE_CC=/usr/bin/clang)");

  auto opt = from_env("IRFORGE_OPT");
  if (!opt && self_dir) {
    auto sibling = *self_dir / "irforge-opt";
    if (auto p = find_executable(sibling.string())) opt = p;
  }
  if (!opt) opt = find_executable("opt-14");
  if (!opt) opt = find_executable("opt");
  if (!opt) opt = find_executable("irforge-opt");
  if (!opt)
    throw ToolchainError(
        "no IR optimizer found; set IRFORGE_OPT to an LLVM `opt` binary or to the bundled irforge-opt");
  return from_paths(*cc, *opt);
}

// --- Flag catalog -----------------------------------------------------------

std::optional<std::size_t> FlagCatalog::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i].name == name || std::string_view(flags[i].name).substr(1) == name) return i;
  return std::nullopt;
}

std::string FlagCatalog::pipeline(const FlagVector& v) const {
  if (v.size() != flags.size()) throw std::invalid_argument("genome length differs from catalog length");
  std::string out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!v.test(i)) continue;
    std::string name = flags[i].name.substr(1);
    if (!out.empty()) out += ',';
    switch (flags[i].kind) {
      case PassKind::Module: out += name; break;
      case PassKind::Cgscc: out += "cgscc(" + name + ")"; break;
      case PassKind::Function: out += "function(" + name + ")"; break;
      case PassKind::Loop: out += "function(loop-mssa(" + name + "))"; break;
    }
  }
  return out;
}

std::string FlagCatalog::digest() const {
  Sha256 h;
  for (const auto& f : flags) h.field(f.name).field(kind_name(f.kind));
  return h.hex();
}

nlohmann::json FlagCatalog::to_json() const {
  nlohmann::json j;
  j["format"] = "irforge-flags";
  j["version"] = 1;
  j["platform"] = platform;
  j["toolchain"] = toolchain_version;
  j["length"] = flags.size();
  auto& arr = j["flags"] = nlohmann::json::array();
  for (const auto& f : flags) arr.push_back({{"name", f.name}, {"kind", kind_name(f.kind)}});
  return j;
}

FlagCatalog FlagCatalog::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "irforge-flags") throw std::runtime_error("not a flag catalog");
  FlagCatalog c;
  c.platform = j.at("platform").get<std::string>();
  c.toolchain_version = j.at("toolchain").get<std::string>();
  for (const auto& f : j.at("flags"))
    c.flags.push_back({f.at("name").get<std::string>(), kind_from_name(f.at("kind").get<std::string>())});
  if (j.at("length").get<std::size_t>() != c.flags.size()) throw std::runtime_error("flag catalog length mismatch");
  return c;
}

FlagFilter FlagFilter::defaults() {
  FlagFilter f;
  // Printers, verifiers, instrumentation, profile-driven and test-only passes
  // do not transform IR in a way the search can use, or need external inputs.
  f.deny = {"print*", "dot-*", "view-*", "verify*", "*debugify*", "no-op-*", "invalidate*",
            "require*", "trigger-crash", "helloworld", "instcount", "aa-eval", "lint", "*asan*",
            "*msan*", "*tsan*", "dfsan", "sancov-module", "memprof*", "pgo-*", "instrprof",
            "instrorderfile", "insert-gcov-profiling", "sample-profile", "pseudo-probe*",
            "bounds-checking", "poison-checking", "*ee-instrument", "function-import",
            "extract-blocks", "cross-dso-cfi", "lowertypetests", "wholeprogramdevirt", "metarenamer",
            "chr", "synthetic-counts-propagation", "annotation-remarks", "annotation2metadata",
            "rewrite-statepoints-for-gc", "strip-gc-relocates", "objc-arc*", "coro-*",
            "make-guards-explicit", "lower-guard-intrinsic", "lower-widenable-condition",
            "guard-widening", "loop-predication", "declare-to-assign"};
  return f;
}

bool FlagFilter::admits(std::string_view name_in) const {
  std::string name(name_in);
  if (!name.empty() && name[0] == '-') name.erase(0, 1);
  auto match = [&](const std::vector<std::string>& pats) {
    for (const auto& p : pats) {
      std::string pat = p;
      if (!pat.empty() && pat[0] == '-') pat.erase(0, 1);
      if (::fnmatch(pat.c_str(), name.c_str(), 0) == 0) return true;
    }
    return false;
  };
  if (!allow.empty() && !match(allow)) return false;
  return !match(deny);
}

std::vector<std::string> FlagFilter::read_patterns(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read pattern file " + file.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

FlagCatalog enumerate_flags(const Toolchain& tc, const FlagFilter& filter) {
  if (!find_executable(tc.opt.string()))
    throw ToolchainError("IR optimizer not found at " + tc.opt.string() + "; set IRFORGE_OPT");
  auto r = run_process({tc.opt.string(), "-print-passes"}, {.timeout_seconds = 120});
  if (!r.ok())
    throw ToolchainError(tc.opt.string() + " -print-passes failed; IRFORGE_OPT must point at a new-pass-manager opt");

  FlagCatalog catalog;
  catalog.toolchain_version = tc.version;
  auto triple = run_process({tc.cc.string(), "-dumpmachine"}, {.timeout_seconds = 30});
  catalog.platform = triple.ok() ? first_line(triple.out) : "unknown";

  std::set<std::string> seen;
  std::optional<PassKind> section;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != ' ') {
      section.reset();
      if (line.find("analyses") != std::string::npos) continue;
      if (line.rfind("Module passes", 0) == 0) section = PassKind::Module;
      else if (line.rfind("CGSCC passes", 0) == 0) section = PassKind::Cgscc;
      else if (line.rfind("Function passes", 0) == 0) section = PassKind::Function;
      else if (line.rfind("Loop passes", 0) == 0) section = PassKind::Loop;
      continue;
    }
    if (!section) continue;
    auto b = line.find_first_not_of(' ');
    std::string name = line.substr(b);
    if (auto lt = name.find('<'); lt != std::string::npos) name.erase(lt);
    if (name.empty() || !seen.insert(name).second) continue;
    if (!filter.admits(name)) continue;
    catalog.flags.push_back({"-" + name, *section});
  }
  return catalog;
}

// --- Compiler ---------------------------------------------------------------

Compiler::Compiler(Toolchain tc, fs::path cache_dir, CompilerOptions options)
    : tc_(std::move(tc)), cache_dir_(std::move(cache_dir)), options_(options) {
  fs::create_directories(cache_dir_);
}

std::mutex& Compiler::stripe(const std::string& key) {
  return stripes_[stable_hash64(key) % std::size(stripes_)];
}

CacheStats Compiler::stats() const { return {hits_.load(), misses_.load(), verified_.load(), mismatches_.load()}; }

std::optional<Compiler::Entry> Compiler::load(const std::string& key) const {
  fs::path dir = cache_dir_ / key.substr(0, 2);
  fs::path meta_path = dir / (key + ".json");
  std::error_code ec;
  if (!fs::exists(meta_path, ec)) return std::nullopt;
  try {
    auto meta = nlohmann::json::parse(read_file(meta_path));
    Entry e;
    std::string status = meta.at("status");
    e.status = status == "ok" ? CompileStatus::Ok : status == "timeout" ? CompileStatus::Timeout : CompileStatus::CompileError;
    e.stderr_excerpt = meta.value("stderr", "");
    if (e.status == CompileStatus::Ok) {
      e.text = read_file(dir / (key + ".ll"));
      if (sha256_hex(e.text) != meta.at("ir_digest").get<std::string>()) {
        log::warn("cache entry {} is corrupt; recompiling", key);
        return std::nullopt;
      }
    }
    return e;
  } catch (const std::exception& ex) {
    log::warn("unreadable cache entry {}: {}", key, ex.what());
    return std::nullopt;
  }
}

void Compiler::store(const std::string& key, const Entry& e, const nlohmann::json& meta_in) const {
  fs::path dir = cache_dir_ / key.substr(0, 2);
  auto meta = meta_in;
  meta["key"] = key;
  meta["status"] = to_string(e.status);
  meta["stderr"] = e.stderr_excerpt;
  meta["toolchain"] = tc_.version;
  if (e.status == CompileStatus::Ok) {
    meta["ir_digest"] = sha256_hex(e.text);
    write_file_atomic(dir / (key + ".ll"), e.text);
  }
  write_file_atomic(dir / (key + ".json"), meta.dump(1) + "\n");
}

CompileOutcome Compiler::run_baseline(const ProgramRecord& program) const {
  ScratchDir scratch(cache_dir_ / "tmp");
  std::string input = program.language == Language::C ? "input.c" : "input.cpp";
  CompileOutcome failed;
  try {
    write_file_atomic(scratch.path() / input, read_file(program.source_path));
  } catch (const std::exception& e) {
    failed.stderr_excerpt = e.what();
    return failed;
  }
  std::vector<std::string> argv{tc_.cc.string()};
  argv.insert(argv.end(), tc_.frontend_flags.begin(), tc_.frontend_flags.end());
  argv.insert(argv.end(), {input, "-o", "output.ll"});
  auto r = run_process(argv, {.cwd = scratch.path(),
                              .timeout_seconds = tc_.baseline_timeout,
                              .memory_limit_bytes = tc_.memory_limit});
  return outcome_from_process(r, scratch.path() / "output.ll");
}

CompileOutcome Compiler::run_optimize(const IrText& ir, const std::string& pipeline) const {
  ScratchDir scratch(cache_dir_ / "tmp");
  write_file_atomic(scratch.path() / "input.ll", ir.text);
  std::vector<std::string> argv{tc_.opt.string(), "-S"};
  if (!pipeline.empty()) argv.push_back("-passes=" + pipeline);
  argv.insert(argv.end(), {"input.ll", "-o", "output.ll"});
  auto r = run_process(argv, {.cwd = scratch.path(),
                              .timeout_seconds = tc_.optimize_timeout,
                              .memory_limit_bytes = tc_.memory_limit});
  return outcome_from_process(r, scratch.path() / "output.ll");
}

namespace {

bool sampled_for_verification(const std::string& key) { return stable_hash64(key, 17) % 100 == 0; }

CompileOutcome from_entry(CompileStatus status, std::string text, std::string err) {
  CompileOutcome out;
  out.status = status;
  out.stderr_excerpt = std::move(err);
  out.cache_hit = true;
  if (status == CompileStatus::Ok) {
    IrText ir;
    ir.digest = sha256_hex(text);
    ir.text = std::move(text);
    out.ir = std::move(ir);
  }
  return out;
}

}  // namespace

CompileOutcome Compiler::compile_baseline(const ProgramRecord& program) {
  const auto key = Sha256()
                       .field("baseline-v1")
                       .field(program.content_hash)
                       .field(program.language == Language::C ? "c" : "c++")
                       .field(tc_.version)
                       .field(nlohmann::json(tc_.frontend_flags).dump())
                       .hex();
  auto finish = [&](CompileOutcome out) {
    if (out.ir) {
      out.ir->producer = Producer::Baseline;
      out.ir->program_id = program.id;
    }
    return out;
  };

  std::lock_guard lock(stripe(key));
  const auto t0 = std::chrono::steady_clock::now();
  if (options_.use_cache) {
    if (auto e = load(key)) {
      ++hits_;
      auto out = from_entry(e->status, std::move(e->text), std::move(e->stderr_excerpt));
      if (options_.verify_cache && out.ir && sampled_for_verification(key)) {
        ++verified_;
        auto fresh = run_baseline(program);
        if (!fresh.ir || fresh.ir->digest != out.ir->digest) {
          ++mismatches_;
          log::warn("cache verification mismatch for baseline of {}", program.id);
        }
      }
      out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return finish(std::move(out));
    }
  }
  ++misses_;
  auto out = run_baseline(program);
  if (options_.use_cache) {
    Entry e{out.status, out.ir ? out.ir->text : std::string(), out.stderr_excerpt};
    store(key, e, {{"producer", "baseline"}, {"program_id", program.id}, {"source_sha256", program.content_hash}});
  }
  return finish(std::move(out));
}

CompileOutcome Compiler::optimize(const IrText& ir, const FlagVector& v, const FlagCatalog& catalog) {
  if (ir.producer != Producer::Baseline) throw std::invalid_argument("optimize expects baseline IR");
  if (v.size() != catalog.size()) throw std::invalid_argument("genome length differs from catalog length");
  const auto key = Sha256()
                       .field("optimize-v1")
                       .field(ir.digest)
                       .field(v.digest())
                       .field(catalog.digest())
                       .field(tc_.version)
                       .hex();
  auto finish = [&](CompileOutcome out) {
    if (out.ir) {
      out.ir->producer = Producer::Optimized;
      out.ir->genome = v.to_string();
      out.ir->program_id = ir.program_id;
    }
    return out;
  };

  std::lock_guard lock(stripe(key));
  const auto t0 = std::chrono::steady_clock::now();
  if (options_.use_cache) {
    if (auto e = load(key)) {
      ++hits_;
      auto out = from_entry(e->status, std::move(e->text), std::move(e->stderr_excerpt));
      if (options_.verify_cache && out.ir && sampled_for_verification(key)) {
        ++verified_;
        auto fresh = run_optimize(ir, catalog.pipeline(v));
        if (!fresh.ir || fresh.ir->digest != out.ir->digest) {
          ++mismatches_;
          log::warn("cache verification mismatch for {} under genome {}", ir.program_id, v.digest().substr(0, 12));
        }
      }
      out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return finish(std::move(out));
    }
  }
  ++misses_;
  auto out = run_optimize(ir, catalog.pipeline(v));
  if (options_.use_cache) {
    Entry e{out.status, out.ir ? out.ir->text : std::string(), out.stderr_excerpt};
    store(key, e,
          {{"producer", "optimized"},
           {"program_id", ir.program_id},
           {"input_digest", ir.digest},
           {"genome", v.to_string()}});
  }
  return finish(std::move(out));
}

}  // namespace irforge
