#include "irforge/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace irforge {

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::sample_distinct(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("Rng::sample_distinct: k > n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + below(n - i)]);
  pool.resize(k);
  return pool;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(std::string_view state) {
  std::istringstream is{std::string(state)};
  is >> engine_;
  if (!is) throw std::runtime_error("Rng::restore: malformed state");
}

}  // namespace irforge
