#include <map>
#include <queue>
#include <tuple>

#include "irforge/kernel.hpp"

namespace irforge::reference {

SpGraph shortest_paths(const Cfg& g, bool directed) {
  const std::size_t n = g.node_count();
  const auto adj = g.adjacency(directed);
  std::map<std::tuple<int, int, std::uint32_t>, std::uint64_t> hist;
  std::map<std::uint32_t, std::uint64_t> by_d;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<long> dist(n, -1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (int v : adj[u]) {
        auto w = static_cast<std::size_t>(v);
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (dist[t] < 0) continue;
      auto d = static_cast<std::uint32_t>(dist[t]);
      ++hist[{static_cast<int>(g.kind(static_cast<int>(s))), static_cast<int>(g.kind(static_cast<int>(t))), d}];
      ++by_d[d];
    }
  }
  SpGraph out;
  for (auto& [k, c] : hist)
    out.buckets.push_back({static_cast<NodeKind>(std::get<0>(k)), static_cast<NodeKind>(std::get<1>(k)), std::get<2>(k), c});
  if (!by_d.empty()) {
    out.by_distance.assign(by_d.rbegin()->first + 1, 0);
    for (auto& [d, c] : by_d) out.by_distance[d] = c;
  }
  return out;
}

double sp_kernel(const SpGraph& a, const SpGraph& b, bool labeled) {
  long double sum = 0;
  for (const auto& x : a.buckets)
    for (const auto& y : b.buckets) {
      if (x.distance != y.distance) continue;
      if (labeled && (x.from != y.from || x.to != y.to)) continue;
      sum += static_cast<long double>(x.count) * static_cast<long double>(y.count);
    }
  return static_cast<double>(sum);
}

}  // namespace irforge::reference
