#include "support.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <fstream>

namespace testing {

irforge::Toolchain toolchain() { return irforge::Toolchain::from_paths(IRFORGE_TEST_CC, IRFORGE_TEST_OPT); }

fs::path fixtures() { return IRFORGE_FIXTURES; }
fs::path corpus20() { return fixtures() / "corpus20"; }
fs::path cli() { return IRFORGE_TEST_CLI; }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

irforge::ProcessResult run_cli(const std::vector<std::string>& args) {
  ::setenv("IRFORGE_CC", IRFORGE_TEST_CC, 1);
  ::setenv("IRFORGE_OPT", IRFORGE_TEST_OPT, 1);
  std::vector<std::string> argv{cli().string()};
  argv.insert(argv.end(), args.begin(), args.end());
  return irforge::run_process(argv, {.timeout_seconds = 1200});
}

void write_patterns(const fs::path& file, const std::vector<std::string>& names) {
  std::ofstream out(file);
  for (const auto& n : names) out << n << "\n";
}

const std::vector<std::string>& reduced_catalog() {
  static const std::vector<std::string> names = {
      "mem2reg", "sroa", "instcombine", "simplifycfg", "early-cse", "gvn", "dce", "adce", "bdce", "dse",
      "reassociate", "loop-rotate", "licm", "loop-deletion", "indvars", "loop-simplify", "lcssa", "sccp",
      "ipsccp", "globalopt", "deadargelim", "inline", "jump-threading", "correlated-propagation",
      "tailcallelim", "break-crit-edges", "mergereturn", "lowerswitch", "loop-unroll", "memcpyopt"};
  return names;
}

std::size_t count_substr(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + needle.size())) ++n;
  return n;
}

}  // namespace testing
