#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace irforge {

// Seeded generator whose derived draws do not depend on the standard
// library's distribution implementations, so sequences (and checkpointed
// states) are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of randomness.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

  /// Standard normal via Box-Muller; stateless between calls.
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  /// k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k);

  std::string state() const;
  void restore(std::string_view state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace irforge
