// irforge-opt: a minimal standalone IR optimizer in the spirit of `opt`,
// built directly on the LLVM C API (new pass manager, LLVMRunPasses).
//
// Supported invocations:
//   irforge-opt -print-passes
//   irforge-opt --version
//   irforge-opt [-S] [-o OUT] [-passes=PIPELINE] [-flag ...] [INPUT|-]
//
// Legacy-style `-name` flags are translated to a pipeline, each pass wrapped
// in the adaptor matching its registry kind. The module identifier of the
// input is preserved in the output.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

extern "C" {
typedef int LLVMBool;
typedef struct LLVMOpaqueContext* LLVMContextRef;
typedef struct LLVMOpaqueModule* LLVMModuleRef;
typedef struct LLVMOpaqueMemoryBuffer* LLVMMemoryBufferRef;
typedef struct LLVMOpaquePassBuilderOptions* LLVMPassBuilderOptionsRef;
typedef struct LLVMOpaqueError* LLVMErrorRef;
typedef struct LLVMOpaqueTargetMachine* LLVMTargetMachineRef;
typedef struct LLVMTarget* LLVMTargetRef;

LLVMContextRef LLVMContextCreate(void);
void LLVMContextDispose(LLVMContextRef);
LLVMMemoryBufferRef LLVMCreateMemoryBufferWithMemoryRangeCopy(const char*, size_t, const char*);
LLVMBool LLVMParseIRInContext(LLVMContextRef, LLVMMemoryBufferRef, LLVMModuleRef*, char**);
LLVMModuleRef LLVMModuleCreateWithNameInContext(const char*, LLVMContextRef);
void LLVMSetModuleIdentifier(LLVMModuleRef, const char*, size_t);
const char* LLVMGetTarget(LLVMModuleRef);
void LLVMDisposeModule(LLVMModuleRef);
char* LLVMPrintModuleToString(LLVMModuleRef);
void LLVMDisposeMessage(char*);
LLVMBool LLVMVerifyModule(LLVMModuleRef, int, char**);

LLVMPassBuilderOptionsRef LLVMCreatePassBuilderOptions(void);
void LLVMDisposePassBuilderOptions(LLVMPassBuilderOptionsRef);
void LLVMPassBuilderOptionsSetVerifyEach(LLVMPassBuilderOptionsRef, LLVMBool);
LLVMErrorRef LLVMRunPasses(LLVMModuleRef, const char*, LLVMTargetMachineRef, LLVMPassBuilderOptionsRef);
char* LLVMGetErrorMessage(LLVMErrorRef);
void LLVMDisposeErrorMessage(char*);

void LLVMInitializeX86TargetInfo(void);
void LLVMInitializeX86Target(void);
void LLVMInitializeX86TargetMC(void);
LLVMBool LLVMGetTargetFromTriple(const char*, LLVMTargetRef*, char**);
LLVMTargetMachineRef LLVMCreateTargetMachine(LLVMTargetRef, const char*, const char*, const char*, int, int, int);
void LLVMDisposeTargetMachine(LLVMTargetMachineRef);
}

namespace {

constexpr const char* kVersion = "irforge-opt 1.0 (LLVM 14 C API)";

enum class PassKind { Module, Cgscc, Function, Loop };

struct PassEntry {
  const char* name;
  PassKind kind;
};

// Candidate registry names for LLVM 14. Only names the linked library
// accepts are reported by -print-passes.
constexpr PassEntry kCandidates[] = {
    // module
    {"always-inline", PassKind::Module}, {"annotation2metadata", PassKind::Module},
    {"attributor", PassKind::Module}, {"called-value-propagation", PassKind::Module},
    {"canonicalize-aliases", PassKind::Module}, {"cg-profile", PassKind::Module},
    {"check-debugify", PassKind::Module}, {"constmerge", PassKind::Module},
    {"cross-dso-cfi", PassKind::Module}, {"deadargelim", PassKind::Module},
    {"debugify", PassKind::Module}, {"dot-callgraph", PassKind::Module},
    {"elim-avail-extern", PassKind::Module}, {"extract-blocks", PassKind::Module},
    {"forceattrs", PassKind::Module}, {"function-import", PassKind::Module},
    {"function-specialization", PassKind::Module}, {"globaldce", PassKind::Module},
    {"globalopt", PassKind::Module}, {"globalsplit", PassKind::Module},
    {"hotcoldsplit", PassKind::Module}, {"inferattrs", PassKind::Module},
    {"inliner-wrapper", PassKind::Module}, {"inliner-wrapper-no-mandatory-first", PassKind::Module},
    {"insert-gcov-profiling", PassKind::Module}, {"instrorderfile", PassKind::Module},
    {"instrprof", PassKind::Module}, {"internalize", PassKind::Module},
    {"ipsccp", PassKind::Module}, {"iroutliner", PassKind::Module},
    {"loop-extract", PassKind::Module}, {"lowertypetests", PassKind::Module},
    {"metarenamer", PassKind::Module}, {"mergefunc", PassKind::Module},
    {"name-anon-globals", PassKind::Module}, {"no-op-module", PassKind::Module},
    {"objc-arc-apelim", PassKind::Module}, {"openmp-opt", PassKind::Module},
    {"partial-inliner", PassKind::Module}, {"pgo-icall-prom", PassKind::Module},
    {"pgo-instr-gen", PassKind::Module}, {"pgo-instr-use", PassKind::Module},
    {"poison-checking", PassKind::Module}, {"print-callgraph", PassKind::Module},
    {"print-ir-similarity", PassKind::Module}, {"print-lcg", PassKind::Module},
    {"print-lcg-dot", PassKind::Module}, {"print-must-be-executed-contexts", PassKind::Module},
    {"print-profile-summary", PassKind::Module}, {"print-stack-safety", PassKind::Module},
    {"pseudo-probe", PassKind::Module}, {"pseudo-probe-update", PassKind::Module},
    {"rel-lookup-table-converter", PassKind::Module}, {"rewrite-statepoints-for-gc", PassKind::Module},
    {"rewrite-symbols", PassKind::Module}, {"rpo-function-attrs", PassKind::Module},
    {"sample-profile", PassKind::Module}, {"scc-oz-module-inliner", PassKind::Module},
    {"strip", PassKind::Module}, {"strip-dead-debug-info", PassKind::Module},
    {"strip-dead-prototypes", PassKind::Module}, {"strip-debug-declare", PassKind::Module},
    {"strip-nondebug", PassKind::Module}, {"strip-nonlinetable-debuginfo", PassKind::Module},
    {"synthetic-counts-propagation", PassKind::Module}, {"verify", PassKind::Module},
    {"wholeprogramdevirt", PassKind::Module}, {"dfsan", PassKind::Module},
    {"asan-module", PassKind::Module}, {"msan-module", PassKind::Module},
    {"tsan-module", PassKind::Module}, {"sancov-module", PassKind::Module},
    {"memprof-module", PassKind::Module}, {"trigger-crash", PassKind::Module},
    // cgscc
    {"argpromotion", PassKind::Cgscc}, {"function-attrs", PassKind::Cgscc},
    {"attributor-cgscc", PassKind::Cgscc}, {"openmp-opt-cgscc", PassKind::Cgscc},
    {"coro-split", PassKind::Cgscc}, {"inline", PassKind::Cgscc},
    {"no-op-cgscc", PassKind::Cgscc},
    // function
    {"aa-eval", PassKind::Function}, {"adce", PassKind::Function},
    {"add-discriminators", PassKind::Function}, {"aggressive-instcombine", PassKind::Function},
    {"assume-builder", PassKind::Function}, {"assume-simplify", PassKind::Function},
    {"alignment-from-assumptions", PassKind::Function}, {"annotation-remarks", PassKind::Function},
    {"bdce", PassKind::Function}, {"bounds-checking", PassKind::Function},
    {"break-crit-edges", PassKind::Function}, {"callsite-splitting", PassKind::Function},
    {"consthoist", PassKind::Function}, {"constraint-elimination", PassKind::Function},
    {"chr", PassKind::Function}, {"coro-early", PassKind::Function},
    {"coro-elide", PassKind::Function}, {"coro-cleanup", PassKind::Function},
    {"correlated-propagation", PassKind::Function}, {"dce", PassKind::Function},
    {"dfa-jump-threading", PassKind::Function}, {"div-rem-pairs", PassKind::Function},
    {"dse", PassKind::Function}, {"dot-cfg", PassKind::Function},
    {"dot-cfg-only", PassKind::Function}, {"dot-dom", PassKind::Function},
    {"dot-dom-only", PassKind::Function}, {"early-cse", PassKind::Function},
    {"fix-irreducible", PassKind::Function}, {"flattencfg", PassKind::Function},
    {"make-guards-explicit", PassKind::Function}, {"gvn", PassKind::Function},
    {"gvn-hoist", PassKind::Function}, {"gvn-sink", PassKind::Function},
    {"helloworld", PassKind::Function}, {"infer-address-spaces", PassKind::Function},
    {"instcombine", PassKind::Function}, {"instcount", PassKind::Function},
    {"instsimplify", PassKind::Function}, {"irce", PassKind::Function},
    {"float2int", PassKind::Function}, {"no-op-function", PassKind::Function},
    {"libcalls-shrinkwrap", PassKind::Function}, {"lint", PassKind::Function},
    {"inject-tli-mappings", PassKind::Function}, {"instnamer", PassKind::Function},
    {"loweratomic", PassKind::Function}, {"lower-expect", PassKind::Function},
    {"lower-guard-intrinsic", PassKind::Function}, {"lower-constant-intrinsics", PassKind::Function},
    {"lower-widenable-condition", PassKind::Function}, {"lower-matrix-intrinsics", PassKind::Function},
    {"lower-matrix-intrinsics-minimal", PassKind::Function}, {"guard-widening", PassKind::Function},
    {"load-store-vectorizer", PassKind::Function}, {"loop-simplify", PassKind::Function},
    {"loop-sink", PassKind::Function}, {"lowerinvoke", PassKind::Function},
    {"lowerswitch", PassKind::Function}, {"mem2reg", PassKind::Function},
    {"memcpyopt", PassKind::Function}, {"mergeicmps", PassKind::Function},
    {"mergereturn", PassKind::Function}, {"mldst-motion", PassKind::Function},
    {"nary-reassociate", PassKind::Function}, {"newgvn", PassKind::Function},
    {"jump-threading", PassKind::Function}, {"partially-inline-libcalls", PassKind::Function},
    {"lcssa", PassKind::Function}, {"loop-data-prefetch", PassKind::Function},
    {"loop-load-elim", PassKind::Function}, {"loop-fusion", PassKind::Function},
    {"loop-distribute", PassKind::Function}, {"loop-versioning", PassKind::Function},
    {"loop-unroll", PassKind::Function}, {"loop-vectorize", PassKind::Function},
    {"objc-arc", PassKind::Function}, {"objc-arc-contract", PassKind::Function},
    {"objc-arc-expand", PassKind::Function}, {"pgo-memop-opt", PassKind::Function},
    {"print-alias-sets", PassKind::Function}, {"print-predicateinfo", PassKind::Function},
    {"print-mustexecute", PassKind::Function}, {"print-memderefs", PassKind::Function},
    {"reassociate", PassKind::Function}, {"redundant-dbg-inst-elim", PassKind::Function},
    {"reg2mem", PassKind::Function}, {"scalarize-masked-mem-intrin", PassKind::Function},
    {"scalarizer", PassKind::Function}, {"separate-const-offset-from-gep", PassKind::Function},
    {"sccp", PassKind::Function}, {"simplifycfg", PassKind::Function},
    {"sink", PassKind::Function}, {"slp-vectorizer", PassKind::Function},
    {"slsr", PassKind::Function}, {"speculative-execution", PassKind::Function},
    {"sroa", PassKind::Function}, {"strip-gc-relocates", PassKind::Function},
    {"structurizecfg", PassKind::Function}, {"tailcallelim", PassKind::Function},
    {"unify-loop-exits", PassKind::Function}, {"vector-combine", PassKind::Function},
    {"view-cfg", PassKind::Function}, {"view-cfg-only", PassKind::Function},
    {"transform-warning", PassKind::Function}, {"tsan", PassKind::Function},
    {"memprof", PassKind::Function}, {"msan", PassKind::Function},
    {"kmsan", PassKind::Function}, {"asan", PassKind::Function},
    {"hwasan", PassKind::Function}, {"ee-instrument", PassKind::Function},
    {"post-inline-ee-instrument", PassKind::Function}, {"declare-to-assign", PassKind::Function},
    {"typepromotion", PassKind::Function}, {"sink-common-insts", PassKind::Function},
    // loop
    {"canon-freeze", PassKind::Loop}, {"dot-ddg", PassKind::Loop},
    {"licm", PassKind::Loop}, {"loop-idiom", PassKind::Loop},
    {"loop-instsimplify", PassKind::Loop}, {"loop-interchange", PassKind::Loop},
    {"loop-rotate", PassKind::Loop}, {"no-op-loop", PassKind::Loop},
    {"loop-deletion", PassKind::Loop}, {"loop-simplifycfg", PassKind::Loop},
    {"loop-reduce", PassKind::Loop}, {"indvars", PassKind::Loop},
    {"loop-unroll-full", PassKind::Loop}, {"print-access-info", PassKind::Loop},
    {"loop-predication", PassKind::Loop}, {"loop-bound-split", PassKind::Loop},
    {"loop-reroll", PassKind::Loop}, {"loop-versioning-licm", PassKind::Loop},
    {"simple-loop-unswitch", PassKind::Loop}, {"loop-unroll-and-jam", PassKind::Loop},
    {"loop-flatten", PassKind::Loop},
};

std::string wrap(const PassEntry& p) {
  std::string name = p.name;
  switch (p.kind) {
    case PassKind::Module:
      return name;
    case PassKind::Cgscc:
      return "cgscc(" + name + ")";
    case PassKind::Function:
      return "function(" + name + ")";
    case PassKind::Loop:
      return "function(loop-mssa(" + name + "))";
  }
  return name;
}

const PassEntry* lookup(std::string_view name) {
  for (const auto& p : kCandidates)
    if (name == p.name) return &p;
  return nullptr;
}

std::optional<std::string> run_pipeline(LLVMModuleRef module, const std::string& pipeline,
                                        LLVMTargetMachineRef tm) {
  LLVMPassBuilderOptionsRef opts = LLVMCreatePassBuilderOptions();
  LLVMErrorRef err = LLVMRunPasses(module, pipeline.c_str(), tm, opts);
  LLVMDisposePassBuilderOptions(opts);
  if (!err) return std::nullopt;
  char* msg = LLVMGetErrorMessage(err);
  std::string out = msg;
  LLVMDisposeErrorMessage(msg);
  return out;
}

// Silences stderr for the lifetime of the guard (printer passes write there).
class StderrMute {
 public:
  StderrMute() {
    std::fflush(stderr);
    saved_ = dup(2);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      dup2(devnull, 2);
      close(devnull);
    }
  }
  ~StderrMute() {
    std::fflush(stderr);
    if (saved_ >= 0) {
      dup2(saved_, 2);
      close(saved_);
    }
  }

 private:
  int saved_ = -1;
};

// Probes run in a child process: some registered passes abort when handed a
// module without the inputs they expect.
bool probe(const PassEntry& p) {
  std::fflush(stdout);
  pid_t pid = fork();
  if (pid < 0) return false;
  if (pid == 0) {
    StderrMute mute;
    LLVMContextRef ctx = LLVMContextCreate();
    LLVMModuleRef module = LLVMModuleCreateWithNameInContext("probe", ctx);
    bool ok = !run_pipeline(module, wrap(p), nullptr);
    _exit(ok ? 0 : 1);
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) return false;
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

int print_passes() {
  std::vector<const PassEntry*> ok;
  for (const auto& p : kCandidates) {
    if (std::string_view(p.name) == "trigger-crash") continue;
    if (probe(p)) ok.push_back(&p);
  }

  const std::pair<PassKind, const char*> sections[] = {
      {PassKind::Module, "Module passes:"},
      {PassKind::Cgscc, "CGSCC passes:"},
      {PassKind::Function, "Function passes:"},
      {PassKind::Loop, "Loop passes:"},
  };
  for (const auto& [kind, title] : sections) {
    std::cout << title << "\n";
    for (const PassEntry* p : ok)
      if (p->kind == kind) std::cout << "  " << p->name << "\n";
  }
  return 0;
}

LLVMTargetMachineRef make_target_machine(LLVMModuleRef module) {
  const char* triple = LLVMGetTarget(module);
  if (!triple || !*triple) return nullptr;
  if (std::string_view(triple).find("x86_64") == std::string_view::npos &&
      std::string_view(triple).find("i386") == std::string_view::npos &&
      std::string_view(triple).find("i686") == std::string_view::npos)
    return nullptr;
  LLVMInitializeX86TargetInfo();
  LLVMInitializeX86Target();
  LLVMInitializeX86TargetMC();
  LLVMTargetRef target = nullptr;
  char* err = nullptr;
  if (LLVMGetTargetFromTriple(triple, &target, &err)) {
    LLVMDisposeMessage(err);
    return nullptr;
  }
  // CodeGenOptLevel::Default, RelocMode::Default, CodeModel::Default
  return LLVMCreateTargetMachine(target, triple, "", "", 2, 0, 0);
}

int usage() {
  std::cerr << "usage: irforge-opt [-S] [-o OUT] [-passes=PIPELINE] [-flag ...] [INPUT]\n"
               "       irforge-opt -print-passes | --version\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::string input = "-";
  std::string output = "-";
  std::vector<std::string> pipeline;

  for (int i = 1; i < argc; ++i) {
    std::string_view arg = argv[i];
    if (arg == "-print-passes" || arg == "--print-passes") return print_passes();
    if (arg == "--version" || arg == "-version") {
      std::cout << kVersion << "\n";
      return 0;
    }
    if (arg == "-h" || arg == "-help" || arg == "--help") {
      usage();
      return 0;
    }
    if (arg == "-S") continue;
    if (arg == "-o") {
      if (++i >= argc) return usage();
      output = argv[i];
      continue;
    }
    if (arg.rfind("-passes=", 0) == 0 || arg.rfind("--passes=", 0) == 0) {
      std::string_view p = arg.substr(arg.find('=') + 1);
      if (!p.empty()) pipeline.emplace_back(p);
      continue;
    }
    if (arg.size() > 1 && arg[0] == '-') {
      std::string_view name = arg.substr(arg[1] == '-' ? 2 : 1);
      const PassEntry* entry = lookup(name);
      if (!entry) {
        std::cerr << "irforge-opt: unknown pass flag '" << arg << "'\n";
        return 2;
      }
      pipeline.push_back(wrap(*entry));
      continue;
    }
    input = std::string(arg);
  }

  std::string text;
  if (input == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
      std::cerr << "irforge-opt: cannot open '" << input << "'\n";
      return 1;
    }
    text.assign(std::istreambuf_iterator<char>(in), {});
  }

  LLVMContextRef ctx = LLVMContextCreate();
  LLVMMemoryBufferRef buf =
      LLVMCreateMemoryBufferWithMemoryRangeCopy(text.data(), text.size(), input.c_str());
  LLVMModuleRef module = nullptr;
  char* msg = nullptr;
  if (LLVMParseIRInContext(ctx, buf, &module, &msg)) {
    std::cerr << "irforge-opt: " << (msg ? msg : "parse error") << "\n";
    LLVMDisposeMessage(msg);
    LLVMContextDispose(ctx);
    return 1;
  }
  LLVMSetModuleIdentifier(module, input.c_str(), input.size());

  int rc = 0;
  std::string joined;
  for (const auto& p : pipeline) {
    if (!joined.empty()) joined += ',';
    joined += p;
  }
  if (!joined.empty()) {
    LLVMTargetMachineRef tm = make_target_machine(module);
    auto err = run_pipeline(module, joined, tm);
    if (tm) LLVMDisposeTargetMachine(tm);
    if (err) {
      std::cerr << "irforge-opt: " << *err << "\n";
      rc = 1;
    }
  }
  if (rc == 0) {
    char* vmsg = nullptr;
    // LLVMReturnStatusAction = 2
    if (LLVMVerifyModule(module, 2, &vmsg)) {
      std::cerr << "irforge-opt: verifier: " << (vmsg ? vmsg : "") << "\n";
      rc = 1;
    }
    LLVMDisposeMessage(vmsg);
  }
  if (rc == 0) {
    char* printed = LLVMPrintModuleToString(module);
    if (output == "-") {
      std::cout << printed;
    } else {
      std::ofstream out(output, std::ios::binary);
      out << printed;
      if (!out) rc = 1;
    }
    LLVMDisposeMessage(printed);
  }
  LLVMDisposeModule(module);
  LLVMContextDispose(ctx);
  return rc;
}
