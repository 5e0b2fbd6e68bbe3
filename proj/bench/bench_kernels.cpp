#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "irforge/embed/features.hpp"
#include "irforge/kernel.hpp"

namespace {

using irforge::Cfg;
using irforge::NodeKind;

// Loop-heavy CFG shape: a chain with occasional back and forward edges.
Cfg make_cfg(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kind(0, static_cast<int>(irforge::kNodeKindCount) - 1);
  Cfg g;
  for (int i = 0; i < n; ++i) g.add_node(static_cast<NodeKind>(kind(rng)));
  for (int i = 0; i + 1 < n; ++i) {
    g.add_edge(i, i + 1);
    if (rng() % 4 == 0) g.add_edge(i, static_cast<int>(rng() % static_cast<std::uint64_t>(n)));
  }
  return g;
}

void BM_ShortestPathsParallel(benchmark::State& state) {
  auto g = make_cfg(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(irforge::shortest_paths(g));
  state.SetComplexityN(state.range(0));
}

void BM_ShortestPathsReference(benchmark::State& state) {
  auto g = make_cfg(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(irforge::reference::shortest_paths(g));
  state.SetComplexityN(state.range(0));
}

void BM_KernelMerge(benchmark::State& state) {
  auto a = irforge::shortest_paths(make_cfg(static_cast<int>(state.range(0)), 1));
  auto b = irforge::shortest_paths(make_cfg(static_cast<int>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(irforge::sp_kernel(a, b));
}

void BM_KernelReference(benchmark::State& state) {
  auto a = irforge::shortest_paths(make_cfg(static_cast<int>(state.range(0)), 1));
  auto b = irforge::shortest_paths(make_cfg(static_cast<int>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(irforge::reference::sp_kernel(a, b));
}

std::vector<std::string> make_sources(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string s = "int f" + std::to_string(i) + "(int *a, int n) {\n  int s = 0;\n";
    for (std::size_t k = 0; k < 40; ++k)
      s += "  for (int i = 0; i < n; i++) { if (a[i] > " + std::to_string(k) + ") s += a[i] * " +
           std::to_string(i + k) + "; }\n";
    s += "  return s;\n}\n";
    out.push_back(std::move(s));
  }
  return out;
}

void BM_FeaturizeParallel(benchmark::State& state) {
  auto sources = make_sources(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(irforge::embed::featurize_sources(sources));
}

void BM_FeaturizeSerial(benchmark::State& state) {
  auto sources = make_sources(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(irforge::embed::featurize_sources_serial(sources));
}

}  // namespace

BENCHMARK(BM_ShortestPathsParallel)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
BENCHMARK(BM_ShortestPathsReference)->RangeMultiplier(4)->Range(16, 1024)->Complexity();
BENCHMARK(BM_KernelMerge)->Arg(64)->Arg(256);
BENCHMARK(BM_KernelReference)->Arg(64)->Arg(256);
BENCHMARK(BM_FeaturizeParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_FeaturizeSerial)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
