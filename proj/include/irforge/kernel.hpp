#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "irforge/cfg.hpp"

namespace irforge {

// Shortest-path pair multiset, compressed to (kind(u), kind(w), d) buckets.
struct SpBucket {
  NodeKind from = NodeKind::Plain;
  NodeKind to = NodeKind::Plain;
  std::uint32_t distance = 0;
  std::uint64_t count = 0;

  friend bool operator==(const SpBucket&, const SpBucket&) = default;
};

struct SpGraph {
  std::vector<SpBucket> buckets;  // sorted by (from, to, distance)
  std::vector<std::uint64_t> by_distance;  // label-free histogram, index = d

  std::uint64_t pair_count() const;
  friend bool operator==(const SpGraph&, const SpGraph&) = default;
};

struct KernelOptions {
  bool labeled = true;
  bool directed = true;
};

/// Graphs up to this many nodes use Floyd-Warshall; larger ones BFS per source.
inline constexpr std::size_t kDenseApspLimit = 512;

/// All-pairs shortest path histogram (OpenMP-parallel). Unreachable pairs
/// are omitted; every node contributes its zero-distance self pair.
SpGraph shortest_paths(const Cfg& g, bool directed = true);

/// Dirac kernel on distance times Dirac kernel on both endpoint kinds.
double sp_kernel(const SpGraph& a, const SpGraph& b, bool labeled = true);

/// Normalized kernel in [0,1]; 0 when either self-kernel is 0.
double similarity(const SpGraph& a, const SpGraph& b, bool labeled = true);
double similarity(const Cfg& a, const Cfg& b, const KernelOptions& opt = {});

namespace reference {

// Serial implementations kept as a cross-check for the parallel ones.
SpGraph shortest_paths(const Cfg& g, bool directed = true);
double sp_kernel(const SpGraph& a, const SpGraph& b, bool labeled = true);

}  // namespace reference

}  // namespace irforge
