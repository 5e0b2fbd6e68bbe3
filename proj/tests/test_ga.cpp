#include "doctest.h"

#include <numeric>

#include "irforge/fsutil.hpp"
#include "irforge/ga.hpp"
#include "support.hpp"

using namespace irforge;

namespace {

std::size_t hamming(const FlagVector& a, const FlagVector& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a.test(i) != b.test(i);
  return d;
}

std::vector<double> onemax(const std::vector<FlagVector>& genomes, std::size_t) {
  std::vector<double> f;
  for (const auto& g : genomes) f.push_back(static_cast<double>(g.popcount()) / static_cast<double>(g.size()));
  return f;
}

}  // namespace

TEST_CASE("config validation and serialization") {
  GaConfig c;
  CHECK_NOTHROW(c.validate());
  auto back = GaConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  c.population = 7;
  CHECK_THROWS(c.validate());
  c.population = 20;
  c.crossover_prob = 1.5;
  CHECK_THROWS(c.validate());
  c.crossover_prob = 0.4;
  c.mutation_rate = -0.1;
  CHECK_THROWS(c.validate());
}

TEST_CASE("two-point crossover swaps the middle segment") {
  auto [c, d] = crossover_at(FlagVector::from_string("11110000"), FlagVector::from_string("00001111"), {2, 5});
  CHECK(c.to_string() == "11001000");
  CHECK(d.to_string() == "00110111");
  auto [e, f] = crossover_at(FlagVector::from_string("11110000"), FlagVector::from_string("00001111"), {5, 2});
  CHECK(e == c);
  auto [g, h] = crossover_at(FlagVector::from_string("1111"), FlagVector::from_string("0000"), {3});
  CHECK(g.to_string() == "1110");
  CHECK(h.to_string() == "0001");
}

TEST_CASE("random crossover conserves bits per position") {
  Rng rng(4);
  auto a = FlagVector::from_string("1011001110001011");
  auto b = FlagVector::from_string("0110110001110100");
  for (int i = 0; i < 50; ++i) {
    auto [c, d] = crossover(a, b, 2, rng);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(c.test(j) + d.test(j) == a.test(j) + b.test(j));
  }
}

TEST_CASE("mutation") {
  Rng rng(9);
  FlagVector v(200);
  for (int i = 0; i < 20; ++i) CHECK(hamming(v, mutate(v, 0.01, rng)) == 2);
  auto all = mutate(v, 1.0, rng);
  CHECK(all.popcount() == 200);
  CHECK(mutate(v, 0.0, rng) == v);
  CHECK(mutate(v, 1.0, rng, MutationMode::Bernoulli).popcount() == 200);
  std::size_t flips = 0;
  for (int i = 0; i < 200; ++i) flips += hamming(v, mutate(v, 0.05, rng, MutationMode::Bernoulli));
  CHECK(static_cast<double>(flips) / 200.0 == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("initial population density") {
  Rng rng(2);
  GaConfig c;
  c.init_density = 0;
  for (const auto& g : init_population(c, 131, rng)) CHECK(g.popcount() == 0);
  c.init_density = 1;
  for (const auto& g : init_population(c, 131, rng)) CHECK(g.popcount() == 131);
  c.init_density = 0.25;
  auto pop = init_population(c, 131, rng);
  CHECK(pop.size() == 20);
  for (const auto& g : pop) CHECK(g.popcount() <= 131);
  std::size_t total = 0;
  for (const auto& g : pop) total += g.popcount();
  CHECK(static_cast<double>(total) / (20.0 * 131) == doctest::Approx(0.25).epsilon(0.15));
  CHECK_THROWS(init_population(c, 0, rng));
}

TEST_CASE("roulette follows fitness proportions") {
  Rng rng(17);
  const std::size_t n = 200000;
  auto picks = roulette({1.0, 3.0}, n, rng);
  std::size_t ones = std::count(picks.begin(), picks.end(), 1u);
  CHECK(static_cast<double>(ones) / n == doctest::Approx(0.75).epsilon(0.01));

  for (auto i : roulette({0.0, 0.0, 2.0, 0.0}, 1000, rng)) CHECK(i == 2);
  auto uniform = roulette({0.0, 0.0, 0.0, 0.0}, 40000, rng);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(static_cast<double>(std::count(uniform.begin(), uniform.end(), k)) / 40000 == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS(roulette({1.0, -1.0}, 1, rng));
}

TEST_CASE("archive keeps the best distinct genomes") {
  Archive a(3);
  CHECK_FALSE(a.best());
  CHECK(a.offer(FlagVector::from_string("001"), 0.5, 0));
  CHECK(a.offer(FlagVector::from_string("010"), 0.7, 0));
  CHECK_FALSE(a.offer(FlagVector::from_string("010"), 0.9, 1));
  CHECK(a.offer(FlagVector::from_string("011"), 0.6, 1));
  CHECK_FALSE(a.offer(FlagVector::from_string("100"), 0.5, 2));
  CHECK(a.offer(FlagVector::from_string("101"), 0.8, 2));
  REQUIRE(a.members().size() == 3);
  CHECK(a.members()[0].fitness == 0.8);
  CHECK(a.members()[1].fitness == 0.7);
  CHECK(a.members()[2].fitness == 0.6);
  CHECK(*a.best() == 0.8);
  auto back = Archive::from_json(a.to_json());
  CHECK(back.to_json() == a.to_json());
}

TEST_CASE("zero generations evaluates the initial population only") {
  GaConfig c;
  c.generations = 0;
  std::size_t calls = 0;
  auto res = run_ga(c, 40, [&](const auto& g, std::size_t gen) {
    ++calls;
    CHECK(gen == 0);
    return onemax(g, gen);
  });
  CHECK(calls == 1);
  CHECK(res.state.trace.size() == 1);
  CHECK(res.state.archive.members().size() == 6);
}

TEST_CASE("trace invariants") {
  GaConfig c;
  c.generations = 30;
  auto res = run_ga(c, 60, onemax);
  REQUIRE(res.state.trace.size() == 31);
  for (std::size_t t = 0; t < res.state.trace.size(); ++t) {
    const auto& r = res.state.trace[t];
    CHECK(r.generation == t);
    CHECK(r.best >= r.gen_best);
    CHECK(r.gen_best >= r.mean);
    if (t > 0) CHECK(r.best >= res.state.trace[t - 1].best);
  }
  CHECK(res.state.trace.back().best == *res.state.archive.best());
  auto tsv = trace_tsv(res.state.trace);
  CHECK(testing::count_substr(tsv, "\n") == 32);
}

TEST_CASE("runs are deterministic in the seed") {
  GaConfig c;
  c.generations = 15;
  auto a = run_ga(c, 50, onemax);
  auto b = run_ga(c, 50, onemax);
  CHECK(a.state.to_json() == b.state.to_json());
  c.seed = 2;
  auto d = run_ga(c, 50, onemax);
  CHECK(d.state.to_json() != a.state.to_json());
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
  testing::TempDir tmp;
  GaConfig c;
  c.generations = 12;
  auto full = run_ga(c, 50, onemax);

  GaRunOptions opt;
  opt.checkpoint_dir = tmp / "ck";
  opt.halt_at = 5;
  auto part = run_ga(c, 50, onemax, opt);
  CHECK(part.halted);
  CHECK(part.state.generation == 5);
  CHECK(fs::exists(tmp / "ck" / "gen-000005.json"));

  auto latest = load_latest_checkpoint(tmp / "ck");
  REQUIRE(latest);
  CHECK(latest->generation == 5);
  GaRunOptions rest;
  rest.checkpoint_dir = tmp / "ck";
  auto resumed = run_ga(c, 50, onemax, rest, latest);
  CHECK_FALSE(resumed.halted);
  CHECK(resumed.state.to_json() == full.state.to_json());

  GaConfig other = c;
  other.population = 10;
  CHECK_THROWS(run_ga(other, 50, onemax, {}, latest));
  CHECK_THROWS(run_ga(c, 51, onemax, {}, latest));
  CHECK_FALSE(load_latest_checkpoint(tmp / "none"));
}
