#include "doctest.h"

#include <fstream>

#include "irforge/fsutil.hpp"
#include "json.hpp"
#include "support.hpp"

using testing::run_cli;
namespace fs = std::filesystem;

namespace {

std::string ws_build(const testing::TempDir& tmp, const std::string& name = "ws") {
  auto allow = tmp / "allow.txt";
  testing::write_patterns(allow, testing::reduced_catalog());
  auto ws = (tmp / name).string();
  auto r = run_cli({"build", "--corpus", testing::corpus20().string(), "-w", ws, "--allow", allow.string(), "-q"});
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  return ws;
}

std::size_t lines(const std::string& s) { return testing::count_substr(s, "\n"); }

}  // namespace

TEST_CASE("every subcommand has help") {
  auto top = run_cli({"--help"});
  CHECK(top.exit_code == 0);
  for (const char* sub : {"build", "search", "apply", "eval", "ablate"}) {
    CHECK(top.out.find(sub) != std::string::npos);
    auto r = run_cli({sub, "--help"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  CHECK(run_cli({"frobnicate"}).exit_code == 2);
  CHECK(run_cli({"search", "--gens", "many"}).exit_code == 2);
}

TEST_CASE("build happy path and cached rerun") {
  testing::TempDir tmp;
  auto allow = tmp / "allow.txt";
  testing::write_patterns(allow, testing::reduced_catalog());
  auto ws = (tmp / "ws").string();
  auto r = run_cli({"build", "--corpus", testing::corpus20().string(), "-w", ws, "--allow", allow.string()});
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  CHECK(r.out.find("programs\t20\ttrain\t15\ttest\t5") != std::string::npos);
  CHECK(r.out.find("compiled\t20\tquarantined\t0") != std::string::npos);
  CHECK(r.out.find("flags\t30") != std::string::npos);
  CHECK(fs::exists(fs::path(ws) / "vocab.txt"));
  CHECK(fs::exists(fs::path(ws) / "irforge-workspace.json"));

  auto again = run_cli({"build", "--corpus", testing::corpus20().string(), "-w", ws, "--allow", allow.string()});
  REQUIRE(again.exit_code == 0);
  CHECK(again.out.find("cache_hits\t20\tcompiled_now\t0") != std::string::npos);
  CHECK(irforge::read_file(fs::path(ws) / "vocab.txt") == irforge::read_file(fs::path(ws) / "vocab.txt"));

  auto js = run_cli({"build", "--corpus", testing::corpus20().string(), "-w", ws, "--allow", allow.string(), "--format", "json"});
  REQUIRE(js.exit_code == 0);
  CHECK(nlohmann::json::parse(js.out).contains("vocabulary"));
}

TEST_CASE("a corpus with nothing compilable fails clearly") {
  testing::TempDir tmp;
  fs::create_directories(tmp / "c" / "k");
  std::ofstream(tmp / "c" / "k" / "a.c") << "int main( {\n";
  std::ofstream(tmp / "c" / "k" / "b.c") << "this is not C\n";
  auto r = run_cli({"build", "--corpus", (tmp / "c").string(), "-w", (tmp / "ws").string()});
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("zero compilable programs") != std::string::npos);
}

TEST_CASE("a missing toolchain is a usage error") {
  testing::TempDir tmp;
  auto r = irforge::run_process({"env", "IRFORGE_CC=/nonexistent/clang", testing::cli().string(), "build", "--corpus",
                                 testing::corpus20().string(), "-w", (tmp / "ws").string()});
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("IRFORGE_CC") != std::string::npos);
}

TEST_CASE("commands need a built workspace") {
  testing::TempDir tmp;
  CHECK(run_cli({"search", "-w", (tmp / "none").string(), "--gens", "1"}).exit_code == 2);
}

TEST_CASE("search, apply, eval and ablate") {
  testing::TempDir tmp;
  auto ws = ws_build(tmp);
  auto s = run_cli({"search", "-w", ws, "--gens", "5", "--seed", "3", "-q"});
  REQUIRE_MESSAGE(s.exit_code == 0, s.err);
  auto archive = nlohmann::json::parse(irforge::read_file(fs::path(ws) / "reports" / "archive.json"));
  auto n = archive.at("members").size();
  CHECK(n >= 1);
  CHECK(n <= 6);
  CHECK(lines(irforge::read_file(fs::path(ws) / "reports" / "trace.tsv")) == 7);
  CHECK(s.out.find("rank\tfitness") == 0);
  for (const auto& m : archive.at("members")) CHECK(m.contains("flags"));

  SUBCASE("same seed, same archive") {
    auto ws2 = ws_build(tmp, "ws2");
    REQUIRE(run_cli({"search", "-w", ws2, "--gens", "5", "--seed", "3", "-q"}).exit_code == 0);
    CHECK(irforge::read_file(fs::path(ws2) / "reports" / "archive.json") ==
          irforge::read_file(fs::path(ws) / "reports" / "archive.json"));
  }

  SUBCASE("interrupted search resumes to the same result") {
    auto ws3 = ws_build(tmp, "ws3");
    auto h = run_cli({"search", "-w", ws3, "--gens", "5", "--seed", "3", "--halt-at", "3", "-q"});
    REQUIRE(h.exit_code == 0);
    CHECK(h.err.find("halted after generation 3") != std::string::npos);
    CHECK_FALSE(fs::exists(fs::path(ws3) / "reports" / "archive.json"));
    REQUIRE(run_cli({"search", "-w", ws3, "--gens", "5", "--seed", "3", "--resume", "-q"}).exit_code == 0);
    CHECK(irforge::read_file(fs::path(ws3) / "reports" / "archive.json") ==
          irforge::read_file(fs::path(ws) / "reports" / "archive.json"));
    CHECK(irforge::read_file(fs::path(ws3) / "reports" / "trace.tsv") ==
          irforge::read_file(fs::path(ws) / "reports" / "trace.tsv"));
  }

  SUBCASE("apply writes one file per program and rank") {
    auto a1 = run_cli({"apply", "-w", ws, "--topk", "1", "--out", (tmp / "a1").string(), "-q"});
    REQUIRE_MESSAGE(a1.exit_code == 0, a1.err);
    CHECK(a1.out.find("written\t15\tfailed\t0\tprograms\t15\ttopk\t1") != std::string::npos);
    auto all = run_cli({"apply", "-w", ws, "-q"});
    REQUIRE(all.exit_code == 0);
    CHECK(all.out.find("written\t" + std::to_string(15 * n)) != std::string::npos);
    auto manifest = nlohmann::json::parse(irforge::read_file(fs::path(ws) / "apply" / "manifest.json"));
    CHECK(manifest.at("entries").size() == 15 * n);
    for (const auto& e : manifest.at("entries")) CHECK(fs::exists(fs::path(ws) / "apply" / e.at("file").get<std::string>()));
  }

  SUBCASE("eval prints one row per mode") {
    REQUIRE(run_cli({"apply", "-w", ws, "-q"}).exit_code == 0);
    auto e = run_cli({"eval", "-w", ws, "--mode", "all", "--steps", "20", "-q"});
    REQUIRE_MESSAGE(e.exit_code == 0, e.err);
    CHECK(lines(e.out) == 4);
    CHECK(e.out.find("src\t") != std::string::npos);
    CHECK(e.out.find("src+o0\t") != std::string::npos);
    CHECK(e.out.find("src+topk\t") != std::string::npos);
    CHECK(fs::exists(fs::path(ws) / "reports" / "eval.json"));
  }

  SUBCASE("ablate") {
    auto a = run_cli({"ablate", "-w", ws, "--rank", "1", "--format", "tsv", "-q"});
    REQUIRE_MESSAGE(a.exit_code == 0, a.err);
    CHECK(a.out.find("fitness") != std::string::npos);
    CHECK(fs::exists(fs::path(ws) / "reports" / "potency-rank-1.tsv"));
    auto bad = run_cli({"ablate", "-w", ws, "--rank", "99", "-q"});
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("out of range") != std::string::npos);
  }
}
