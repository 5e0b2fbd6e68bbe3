#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "irforge/kernel.hpp"

namespace irforge {

namespace {

constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t K = kNodeKindCount;

// Dense (kind, kind, distance) histogram -> sorted bucket list.
SpGraph from_histogram(const std::vector<std::uint64_t>& hist, std::size_t dmax) {
  SpGraph out;
  out.by_distance.assign(dmax, 0);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b)
      for (std::size_t d = 0; d < dmax; ++d) {
        auto c = hist[(a * K + b) * dmax + d];
        if (c == 0) continue;
        out.buckets.push_back({static_cast<NodeKind>(a), static_cast<NodeKind>(b), static_cast<std::uint32_t>(d), c});
        out.by_distance[d] += c;
      }
  while (!out.by_distance.empty() && out.by_distance.back() == 0) out.by_distance.pop_back();
  return out;
}

void bfs(const std::vector<std::vector<int>>& adj, int s, std::vector<std::uint32_t>& dist, std::vector<int>& queue) {
  std::fill(dist.begin(), dist.end(), kInf);
  queue.clear();
  dist[static_cast<std::size_t>(s)] = 0;
  queue.push_back(s);
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int u = queue[h];
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] != kInf) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
}

}  // namespace

std::uint64_t SpGraph::pair_count() const {
  std::uint64_t n = 0;
  for (auto c : by_distance) n += c;
  return n;
}

SpGraph shortest_paths(const Cfg& g, bool directed) {
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  const auto& kinds = g.kinds();
  const std::size_t dmax = n;  // distances are < n
  std::vector<std::uint64_t> hist(K * K * dmax, 0);

  if (n <= kDenseApspLimit) {
    std::vector<std::uint32_t> d(n * n, kInf);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0;
    for (auto [a, b] : g.edges()) {
      auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      if (ua != ub) d[ua * n + ub] = 1;
      if (!directed && ua != ub) d[ub * n + ua] = 1;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t* dk = &d[k * n];
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t dik = d[i * n + k];
        if (dik == kInf) continue;
        std::uint32_t* di = &d[i * n];
        for (std::size_t j = 0; j < n; ++j) {
          if (dk[j] == kInf) continue;
          std::uint32_t via = dik + dk[j];
          if (via < di[j]) di[j] = via;
        }
      }
    }
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(hist.size(), 0);
#pragma omp for schedule(static) nowait
      for (std::size_t i = 0; i < n; ++i) {
        auto ki = static_cast<std::size_t>(kinds[i]);
        for (std::size_t j = 0; j < n; ++j) {
          auto dij = d[i * n + j];
          if (dij == kInf) continue;
          ++local[(ki * K + static_cast<std::size_t>(kinds[j])) * dmax + dij];
        }
      }
#pragma omp critical
      for (std::size_t x = 0; x < hist.size(); ++x) hist[x] += local[x];
    }
  } else {
    const auto adj = g.adjacency(directed);
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(hist.size(), 0);
      std::vector<std::uint32_t> dist(n);
      std::vector<int> queue;
      queue.reserve(n);
#pragma omp for schedule(dynamic, 16) nowait
      for (std::size_t s = 0; s < n; ++s) {
        bfs(adj, static_cast<int>(s), dist, queue);
        auto ks = static_cast<std::size_t>(kinds[s]);
        for (int v : queue)
          ++local[(ks * K + static_cast<std::size_t>(kinds[static_cast<std::size_t>(v)])) * dmax + dist[static_cast<std::size_t>(v)]];
      }
#pragma omp critical
      for (std::size_t x = 0; x < hist.size(); ++x) hist[x] += local[x];
    }
  }
  return from_histogram(hist, dmax);
}

double sp_kernel(const SpGraph& a, const SpGraph& b, bool labeled) {
  unsigned __int128 sum = 0;
  if (!labeled) {
    std::size_t m = std::min(a.by_distance.size(), b.by_distance.size());
    for (std::size_t d = 0; d < m; ++d)
      sum += static_cast<unsigned __int128>(a.by_distance[d]) * b.by_distance[d];
    return static_cast<double>(sum);
  }
  auto key = [](const SpBucket& x) {
    return std::tuple(static_cast<int>(x.from), static_cast<int>(x.to), x.distance);
  };
  std::size_t i = 0, j = 0;
  while (i < a.buckets.size() && j < b.buckets.size()) {
    auto ka = key(a.buckets[i]), kb = key(b.buckets[j]);
    if (ka < kb) {
      ++i;
    } else if (kb < ka) {
      ++j;
    } else {
      sum += static_cast<unsigned __int128>(a.buckets[i].count) * b.buckets[j].count;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(sum);
}

double similarity(const SpGraph& a, const SpGraph& b, bool labeled) {
  const double kab = sp_kernel(a, b, labeled);
  const double kaa = sp_kernel(a, a, labeled);
  const double kbb = sp_kernel(b, b, labeled);
  if (kaa == 0.0 || kbb == 0.0) return 0.0;
  if (kab == kaa && kab == kbb) return 1.0;
  double s = kab / std::sqrt(kaa * kbb);
  return std::clamp(s, 0.0, 1.0);
}

double similarity(const Cfg& a, const Cfg& b, const KernelOptions& opt) {
  return similarity(shortest_paths(a, opt.directed), shortest_paths(b, opt.directed), opt.labeled);
}

}  // namespace irforge
