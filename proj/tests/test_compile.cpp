#include "doctest.h"

#include <fstream>

#include "irforge/compile.hpp"
#include "irforge/corpus.hpp"
#include "irforge/digest.hpp"
#include "irforge/fsutil.hpp"
#include "support.hpp"

using namespace irforge;

namespace {

ProgramRecord record_for(const fs::path& path, const std::string& id) {
  ProgramRecord r;
  r.id = id;
  r.source_path = path;
  r.class_label = "x";
  r.content_hash = sha256_hex(read_file(path));
  return r;
}

}  // namespace

TEST_CASE("toolchain from explicit paths") {
  auto tc = testing::toolchain();
  CHECK(tc.version.find("cc=") == 0);
  CHECK(tc.version.find("opt=") != std::string::npos);
}

TEST_CASE("toolchain resolution honours the environment") {
  ::setenv("IRFORGE_CC", "/nonexistent/clang", 1);
  CHECK_THROWS_AS(Toolchain::resolve(), ToolchainError);
  ::setenv("IRFORGE_CC", IRFORGE_TEST_CC, 1);
  ::setenv("IRFORGE_OPT", IRFORGE_TEST_OPT, 1);
  auto tc = Toolchain::resolve();
  CHECK(tc.opt == fs::path(IRFORGE_TEST_OPT));
}

TEST_CASE("flag enumeration and filtering") {
  auto tc = testing::toolchain();
  auto cat = enumerate_flags(tc);
  CHECK(cat.size() > 100);
  CHECK(cat.index_of("-mem2reg").has_value());
  CHECK(cat.index_of("simplifycfg").has_value());
  CHECK_FALSE(cat.index_of("-print-module-scope").has_value());
  CHECK_FALSE(cat.index_of("-chr").has_value());
  for (const auto& f : cat.flags) {
    CHECK(f.name[0] == '-');
    CHECK(f.name.find('<') == std::string::npos);
  }
  CHECK(cat.platform.find("x86_64") != std::string::npos);

  auto back = FlagCatalog::from_json(cat.to_json());
  CHECK(back.digest() == cat.digest());

  FlagFilter only;
  only.allow = {"mem2reg", "-simplifycfg", "loop-*"};
  auto small = enumerate_flags(tc, only);
  CHECK(small.index_of("-mem2reg").has_value());
  CHECK_FALSE(small.index_of("-instcombine").has_value());
  for (const auto& f : small.flags) CHECK((f.name == "-mem2reg" || f.name == "-simplifycfg" || f.name.rfind("-loop-", 0) == 0));
}

TEST_CASE("pipeline wrapping by pass kind") {
  FlagCatalog c;
  c.flags = {{"-globalopt", PassKind::Module}, {"-inline", PassKind::Cgscc}, {"-sroa", PassKind::Function},
             {"-licm", PassKind::Loop}};
  FlagVector v(4);
  CHECK(c.pipeline(v).empty());
  for (std::size_t i = 0; i < 4; ++i) v.set(i, true);
  CHECK(c.pipeline(v) == "globalopt,cgscc(inline),function(sroa),function(loop-mssa(licm))");
  CHECK_THROWS(c.pipeline(FlagVector(3)));
}

TEST_CASE("baseline compilation is cached and deterministic") {
  testing::TempDir tmp;
  auto tc = testing::toolchain();
  auto rec = record_for(testing::corpus20() / "arith" / "gcd.c", "arith/gcd.c");
  Compiler c(tc, tmp / "cache");
  auto a = c.compile_baseline(rec);
  REQUIRE(a.status == CompileStatus::Ok);
  CHECK_FALSE(a.cache_hit);
  CHECK(a.ir->text.find("; ModuleID") == std::string::npos);
  CHECK(a.ir->text.find("define") != std::string::npos);
  CHECK(a.ir->digest == sha256_hex(a.ir->text));
  auto b = c.compile_baseline(rec);
  CHECK(b.cache_hit);
  CHECK(b.ir->digest == a.ir->digest);
  CHECK(c.stats().hits == 1);
  CHECK(c.stats().misses == 1);

  Compiler fresh(tc, tmp / "other", {.use_cache = false});
  CHECK(fresh.compile_baseline(rec).ir->digest == a.ir->digest);
}

TEST_CASE("empty sequence leaves baseline IR unchanged") {
  testing::TempDir tmp;
  auto tc = testing::toolchain();
  auto cat = enumerate_flags(tc);
  Compiler c(tc, tmp / "cache");
  for (const char* f : {"control/dead_block.c", "string/vowels.c", "recurse/hanoi.c"}) {
    auto base = c.compile_baseline(record_for(testing::corpus20() / f, f));
    REQUIRE(base.status == CompileStatus::Ok);
    auto opt = c.optimize(*base.ir, FlagVector(cat.size()), cat);
    REQUIRE(opt.status == CompileStatus::Ok);
    CHECK(opt.ir->text == base.ir->text);
  }
}

TEST_CASE("optimization results are cached by genome") {
  testing::TempDir tmp;
  auto tc = testing::toolchain();
  auto cat = enumerate_flags(tc);
  Compiler c(tc, tmp / "cache");
  auto base = c.compile_baseline(record_for(testing::corpus20() / "arith/stack_heavy.c", "s"));
  FlagVector v(cat.size());
  v.set(*cat.index_of("-mem2reg"), true);
  auto o1 = c.optimize(*base.ir, v, cat);
  REQUIRE(o1.status == CompileStatus::Ok);
  CHECK(o1.ir->producer == Producer::Optimized);
  CHECK(o1.ir->text != base.ir->text);
  auto o2 = c.optimize(*base.ir, v, cat);
  CHECK(o2.cache_hit);
  CHECK(o2.ir->text == o1.ir->text);
  CHECK_THROWS(c.optimize(*o1.ir, v, cat));
  CHECK_THROWS(c.optimize(*base.ir, FlagVector(3), cat));
}

TEST_CASE("frontend errors and timeouts are recorded, not thrown") {
  testing::TempDir tmp;
  std::ofstream(tmp / "broken.c") << "int main( { return }\n";
  auto tc = testing::toolchain();
  Compiler c(tc, tmp / "cache");
  auto out = c.compile_baseline(record_for(tmp / "broken.c", "broken.c"));
  CHECK(out.status == CompileStatus::CompileError);
  CHECK_FALSE(out.ir.has_value());
  CHECK_FALSE(out.stderr_excerpt.empty());
  CHECK(out.stderr_excerpt.size() <= 2000);
  // failures are cached too
  CHECK(c.compile_baseline(record_for(tmp / "broken.c", "broken.c")).cache_hit);

  std::ofstream(tmp / "slowcc") << "#!/bin/sh\ncase \"$1\" in --version) echo fake-cc 1.0 ;; *) sleep 5 ;; esac\n";
  fs::permissions(tmp / "slowcc", fs::perms::owner_all);
  auto slow = Toolchain::from_paths(tmp / "slowcc", IRFORGE_TEST_OPT);
  slow.baseline_timeout = 0.3;
  Compiler cs(slow, tmp / "cache2");
  std::ofstream(tmp / "ok.c") << "int main(void){return 0;}\n";
  CHECK(cs.compile_baseline(record_for(tmp / "ok.c", "ok.c")).status == CompileStatus::Timeout);
}

TEST_CASE("corrupt cache entries are recompiled") {
  testing::TempDir tmp;
  auto tc = testing::toolchain();
  auto rec = record_for(testing::corpus20() / "arith/gcd.c", "g");
  {
    Compiler c(tc, tmp / "cache");
    c.compile_baseline(rec);
  }
  for (auto& e : fs::recursive_directory_iterator(tmp / "cache"))
    if (e.path().extension() == ".ll") write_file_atomic(e.path(), "garbage");
  Compiler c(tc, tmp / "cache");
  auto out = c.compile_baseline(rec);
  CHECK(out.status == CompileStatus::Ok);
  CHECK_FALSE(out.cache_hit);
}

TEST_CASE("cache verification re-runs a sample of hits") {
  testing::TempDir tmp;
  auto tc = testing::toolchain();
  auto cat = enumerate_flags(tc);
  Compiler warm(tc, tmp / "cache");
  auto base = warm.compile_baseline(record_for(testing::corpus20() / "array/sum.c", "s"));
  std::vector<FlagVector> genomes;
  for (std::size_t i = 0; i < 1000; ++i) {
    FlagVector v(cat.size());
    v.set(i % cat.size(), true);
    if (i >= cat.size()) v.set((i * 7) % cat.size(), true);
    genomes.push_back(v);
  }
  Compiler verify(tc, tmp / "cache", {.verify_cache = true});
  std::size_t n = 0;
  for (const auto& g : genomes) {
    warm.optimize(*base.ir, g, cat);
    verify.optimize(*base.ir, g, cat);
    if (verify.stats().verified > 0 || ++n > 1000) break;
  }
  CHECK(verify.stats().verified >= 1);
  CHECK(verify.stats().mismatches == 0);
}
