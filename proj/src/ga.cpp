#include "irforge/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "irforge/format.hpp"
#include "irforge/fsutil.hpp"

namespace irforge {

void GaConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("{} must be in [0,1]", what));
  };
  prob(crossover_prob, "crossover probability");
  prob(mutation_rate, "mutation rate");
  prob(init_density, "initial density");
  if (population == 0 || population % 2 != 0) throw std::invalid_argument("population size must be even and positive");
  if (top_k == 0) throw std::invalid_argument("top-K must be positive");
}

nlohmann::json GaConfig::to_json() const {
  return {{"population", population},
          {"generations", generations},
          {"k_points", k_points},
          {"crossover_prob", crossover_prob},
          {"mutation_rate", mutation_rate},
          {"mutation_mode", mutation_mode == MutationMode::Count ? "count" : "bernoulli"},
          {"top_k", top_k},
          {"init_density", init_density},
          {"seed", seed}};
}

GaConfig GaConfig::from_json(const nlohmann::json& j) {
  GaConfig c;
  c.population = j.at("population").get<std::size_t>();
  c.generations = j.at("generations").get<std::size_t>();
  c.k_points = j.at("k_points").get<std::size_t>();
  c.crossover_prob = j.at("crossover_prob").get<double>();
  c.mutation_rate = j.at("mutation_rate").get<double>();
  c.mutation_mode = j.at("mutation_mode").get<std::string>() == "bernoulli" ? MutationMode::Bernoulli : MutationMode::Count;
  c.top_k = j.at("top_k").get<std::size_t>();
  c.init_density = j.at("init_density").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

Population init_population(const GaConfig& cfg, std::size_t length, Rng& rng) {
  if (length == 0) throw std::invalid_argument("cannot initialize genomes over an empty flag catalog");
  Population pop;
  pop.reserve(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    FlagVector v(length);
    for (std::size_t b = 0; b < length; ++b) v.set(b, rng.bernoulli(cfg.init_density));
    pop.push_back(std::move(v));
  }
  return pop;
}

std::pair<FlagVector, FlagVector> crossover_at(const FlagVector& a, const FlagVector& b, std::vector<std::size_t> cuts) {
  if (a.size() != b.size()) throw std::invalid_argument("crossover: genome lengths differ");
  std::sort(cuts.begin(), cuts.end());
  FlagVector c = a, d = b;
  for (std::size_t s = 0; s < cuts.size(); s += 2) {
    std::size_t lo = cuts[s];
    std::size_t hi = s + 1 < cuts.size() ? cuts[s + 1] : a.size();
    for (std::size_t i = lo; i < hi && i < a.size(); ++i) {
      c.set(i, b.test(i));
      d.set(i, a.test(i));
    }
  }
  return {std::move(c), std::move(d)};
}

std::pair<FlagVector, FlagVector> crossover(const FlagVector& a, const FlagVector& b, std::size_t k_points, Rng& rng) {
  const std::size_t L = a.size();
  if (L < 2 || k_points == 0) return {a, b};
  if (k_points >= L) throw std::invalid_argument("crossover: k_points must be below the genome length");
  auto draws = rng.sample_distinct(L - 1, k_points);
  for (auto& c : draws) c += 1;
  return crossover_at(a, b, std::move(draws));
}

FlagVector mutate(const FlagVector& v, double rate, Rng& rng, MutationMode mode) {
  FlagVector out = v;
  const std::size_t L = v.size();
  if (mode == MutationMode::Bernoulli) {
    for (std::size_t i = 0; i < L; ++i)
      if (rng.bernoulli(rate)) out.flip(i);
    return out;
  }
  auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(L)));
  count = std::min(count, L);
  for (auto i : rng.sample_distinct(L, count)) out.flip(i);
  return out;
}

std::vector<std::size_t> roulette(const std::vector<double>& fitness, std::size_t count, Rng& rng) {
  if (fitness.empty()) throw std::invalid_argument("roulette: empty population");
  std::vector<double> cumulative(fitness.size());
  double total = 0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (fitness[i] < 0 || std::isnan(fitness[i])) throw std::invalid_argument("roulette: fitness must be non-negative");
    total += fitness[i];
    cumulative[i] = total;
  }
  std::vector<std::size_t> picks;
  picks.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    if (total <= 0) {
      picks.push_back(rng.below(fitness.size()));
      continue;
    }
    double r = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t idx = it == cumulative.end() ? fitness.size() - 1 : static_cast<std::size_t>(it - cumulative.begin());
    // never land on a zero-width slot
    while (fitness[idx] == 0 && idx + 1 < fitness.size()) ++idx;
    while (fitness[idx] == 0 && idx > 0) --idx;
    picks.push_back(idx);
  }
  return picks;
}

Population select(const Population& pop, const std::vector<double>& fitness, Rng& rng) {
  if (pop.size() != fitness.size()) throw std::invalid_argument("select: population/fitness size mismatch");
  Population next;
  next.reserve(pop.size());
  for (auto i : roulette(fitness, pop.size(), rng)) next.push_back(pop[i]);
  return next;
}

bool Archive::offer(const FlagVector& genome, double fitness, std::size_t generation) {
  for (const auto& m : members_)
    if (m.genome == genome) return false;
  if (members_.size() >= capacity_) {
    if (!(fitness > members_.back().fitness)) return false;
    members_.pop_back();
  }
  Member m{genome, fitness, generation};
  auto pos = std::find_if(members_.begin(), members_.end(), [&](const Member& x) { return fitness > x.fitness; });
  members_.insert(pos, std::move(m));
  return true;
}

std::optional<double> Archive::best() const {
  if (members_.empty()) return std::nullopt;
  return members_.front().fitness;
}

nlohmann::json Archive::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < members_.size(); ++r) {
    const auto& m = members_[r];
    rows.push_back({{"rank", r + 1},
                    {"fitness", m.fitness},
                    {"generation", m.generation},
                    {"popcount", m.genome.popcount()},
                    {"genome", m.genome.to_string()}});
  }
  return {{"format", "irforge-archive"}, {"version", 1}, {"capacity", capacity_}, {"members", rows}};
}

Archive Archive::from_json(const nlohmann::json& j) {
  Archive a(j.at("capacity").get<std::size_t>());
  for (const auto& r : j.at("members"))
    a.members_.push_back({FlagVector::from_string(r.at("genome").get<std::string>()), r.at("fitness").get<double>(),
                          r.at("generation").get<std::size_t>()});
  return a;
}

std::string trace_tsv(const std::vector<TraceRow>& rows) {
  std::string out = "generation\tbest_F\tmean_F\tgen_best_F\n";
  for (const auto& r : rows)
    out += fmt::format("{}\t{}\t{}\t{}\n", r.generation, format_double(r.best), format_double(r.mean), format_double(r.gen_best));
  return out;
}

std::string trace_json(const std::vector<TraceRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"generation", r.generation}, {"best_F", r.best}, {"mean_F", r.mean}, {"gen_best_F", r.gen_best}});
  return j.dump(2) + "\n";
}

nlohmann::json GaState::to_json() const {
  nlohmann::json pop = nlohmann::json::array();
  for (const auto& g : population) pop.push_back(g.to_string());
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& r : trace) tr.push_back({r.generation, r.best, r.mean, r.gen_best});
  return {{"format", "irforge-checkpoint"}, {"version", 1},        {"config", config.to_json()},
          {"length", length},               {"generation", generation}, {"population", pop},
          {"rng", rng_state},               {"archive", archive.to_json()}, {"trace", tr}};
}

GaState GaState::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "irforge-checkpoint") throw std::runtime_error("not an irforge checkpoint");
  GaState s;
  s.config = GaConfig::from_json(j.at("config"));
  s.length = j.at("length").get<std::size_t>();
  s.generation = j.at("generation").get<std::size_t>();
  for (const auto& g : j.at("population")) s.population.push_back(FlagVector::from_string(g.get<std::string>()));
  s.rng_state = j.at("rng").get<std::string>();
  s.archive = Archive::from_json(j.at("archive"));
  for (const auto& r : j.at("trace"))
    s.trace.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()});
  return s;
}

namespace {

TraceRow record(GaState& st, const Population& pop, const std::vector<double>& fit, std::size_t t) {
  for (std::size_t i = 0; i < pop.size(); ++i) st.archive.offer(pop[i], fit[i], t);
  TraceRow row;
  row.generation = t;
  row.mean = fit.empty() ? 0.0 : std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(fit.size());
  row.gen_best = fit.empty() ? 0.0 : *std::max_element(fit.begin(), fit.end());
  row.best = st.archive.best().value_or(0.0);
  st.trace.push_back(row);
  return row;
}

void checkpoint(const GaState& st, const std::optional<std::filesystem::path>& dir) {
  if (!dir) return;
  std::filesystem::create_directories(*dir);
  auto text = st.to_json().dump() + "\n";
  write_file_atomic(*dir / fmt::format("gen-{:06}.json", st.generation), text);
  write_file_atomic(*dir / "latest.json", text);
}

std::vector<double> evaluate(const BatchFitness& fitness, const Population& pop, std::size_t t) {
  auto fit = fitness(pop, t);
  if (fit.size() != pop.size()) throw std::runtime_error("fitness function returned the wrong number of scores");
  return fit;
}

}  // namespace

GaResult run_ga(const GaConfig& cfg, std::size_t length, const BatchFitness& fitness, const GaRunOptions& options,
                std::optional<GaState> resume) {
  cfg.validate();
  GaResult result;
  GaState& st = result.state;
  Rng rng(cfg.seed);
  if (resume) {
    st = std::move(*resume);
    if (st.length != length) throw std::runtime_error("checkpoint genome length does not match the flag catalog");
    if (st.config.to_json() != cfg.to_json()) {
      // only the generation budget may change between runs
      auto a = st.config.to_json(), b = cfg.to_json();
      a.erase("generations");
      b.erase("generations");
      if (a != b) throw std::runtime_error("checkpoint was written with a different GA configuration");
      st.config.generations = cfg.generations;
    }
    rng.restore(st.rng_state);
  } else {
    st.config = cfg;
    st.length = length;
    st.archive = Archive(cfg.top_k);
    Population pop = init_population(cfg, length, rng);
    auto fit = evaluate(fitness, pop, 0);
    auto row = record(st, pop, fit, 0);
    st.population = select(pop, fit, rng);
    st.generation = 0;
    st.rng_state = rng.state();
    checkpoint(st, options.checkpoint_dir);
    if (options.on_generation) options.on_generation(row);
    if (options.halt_at && *options.halt_at == 0) {
      result.halted = true;
      return result;
    }
  }

  for (std::size_t t = st.generation + 1; t <= cfg.generations; ++t) {
    Population pop = st.population;
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
      if (!rng.bernoulli(cfg.crossover_prob)) continue;
      auto [c, d] = crossover(pop[order[i]], pop[order[i + 1]], cfg.k_points, rng);
      pop[order[i]] = std::move(c);
      pop[order[i + 1]] = std::move(d);
    }
    for (auto& g : pop) g = mutate(g, cfg.mutation_rate, rng, cfg.mutation_mode);
    auto fit = evaluate(fitness, pop, t);
    auto row = record(st, pop, fit, t);
    st.population = select(pop, fit, rng);
    st.generation = t;
    st.rng_state = rng.state();
    checkpoint(st, options.checkpoint_dir);
    if (options.on_generation) options.on_generation(row);
    if (options.halt_at && *options.halt_at == t && t < cfg.generations) {
      result.halted = true;
      return result;
    }
  }
  return result;
}

std::optional<GaState> load_latest_checkpoint(const std::filesystem::path& dir) {
  auto path = dir / "latest.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  return GaState::from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace irforge
