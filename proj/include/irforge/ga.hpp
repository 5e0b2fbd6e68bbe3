#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "irforge/flag_vector.hpp"
#include "irforge/rng.hpp"

namespace irforge {

enum class MutationMode { Count, Bernoulli };

struct GaConfig {
  std::size_t population = 20;
  std::size_t generations = 800;
  std::size_t k_points = 2;
  double crossover_prob = 0.4;
  double mutation_rate = 0.01;
  MutationMode mutation_mode = MutationMode::Count;
  std::size_t top_k = 6;
  double init_density = 0.25;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on out-of-range values or an odd population.
  void validate() const;
  nlohmann::json to_json() const;
  static GaConfig from_json(const nlohmann::json& j);
};

using Population = std::vector<FlagVector>;

Population init_population(const GaConfig& cfg, std::size_t length, Rng& rng);

/// Swaps the segments [c0,c1), [c2,c3), ... (and [c_last, L) for odd k).
std::pair<FlagVector, FlagVector> crossover_at(const FlagVector& a, const FlagVector& b, std::vector<std::size_t> cuts);
/// k distinct cut points drawn from [1, L-1].
std::pair<FlagVector, FlagVector> crossover(const FlagVector& a, const FlagVector& b, std::size_t k_points, Rng& rng);

/// Count mode flips exactly round(rate * L) distinct bits; Bernoulli mode
/// flips each bit independently with probability `rate`.
FlagVector mutate(const FlagVector& v, double rate, Rng& rng, MutationMode mode = MutationMode::Count);

/// Roulette-wheel draw of `count` indices with replacement; uniform when
/// every fitness is zero.
std::vector<std::size_t> roulette(const std::vector<double>& fitness, std::size_t count, Rng& rng);
Population select(const Population& pop, const std::vector<double>& fitness, Rng& rng);

class Archive {
 public:
  struct Member {
    FlagVector genome;
    double fitness = 0;
    std::size_t generation = 0;
  };

  explicit Archive(std::size_t capacity = 6) : capacity_(capacity) {}

  /// Returns true when the genome entered the archive.
  bool offer(const FlagVector& genome, double fitness, std::size_t generation);
  const std::vector<Member>& members() const { return members_; }
  std::size_t capacity() const { return capacity_; }
  std::optional<double> best() const;

  nlohmann::json to_json() const;
  static Archive from_json(const nlohmann::json& j);

 private:
  std::size_t capacity_;
  std::vector<Member> members_;  // descending fitness
};

struct TraceRow {
  std::size_t generation = 0;
  double best = 0;      // archive best so far
  double mean = 0;      // population mean this generation
  double gen_best = 0;  // population best this generation
};

std::string trace_tsv(const std::vector<TraceRow>& rows);
std::string trace_json(const std::vector<TraceRow>& rows);

struct GaState {
  GaConfig config;
  std::size_t length = 0;
  std::size_t generation = 0;  // last completed generation
  Population population;       // selected parents for the next generation
  std::string rng_state;
  Archive archive;
  std::vector<TraceRow> trace;

  nlohmann::json to_json() const;
  static GaState from_json(const nlohmann::json& j);
};

using BatchFitness = std::function<std::vector<double>(const std::vector<FlagVector>& genomes, std::size_t generation)>;

struct GaResult {
  GaState state;
  bool halted = false;
};

struct GaRunOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  std::optional<std::size_t> halt_at;  // stop after this generation, as if interrupted
  std::function<void(const TraceRow&)> on_generation;
};

/// Generation 0 evaluates the initial population. Each later generation
/// pairs the parents after a shuffle, crosses pairs with the configured
/// probability, mutates everyone, evaluates, updates the archive and selects.
GaResult run_ga(const GaConfig& cfg, std::size_t length, const BatchFitness& fitness,
                const GaRunOptions& options = {}, std::optional<GaState> resume = std::nullopt);

std::optional<GaState> load_latest_checkpoint(const std::filesystem::path& dir);

}  // namespace irforge
