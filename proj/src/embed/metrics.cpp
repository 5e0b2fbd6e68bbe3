#include "irforge/embed/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace irforge::embed {

std::optional<double> average_precision(const std::vector<bool>& relevance) {
  std::size_t hits = 0;
  double sum = 0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (!relevance[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

RetrievalResult retrieval_metrics(const std::vector<std::vector<double>>& emb, const std::vector<std::string>& labels) {
  if (emb.size() != labels.size()) throw std::invalid_argument("retrieval: embeddings/labels size mismatch");
  const std::size_t n = emb.size();
  std::map<std::string, std::size_t> class_size;
  for (const auto& l : labels) ++class_size[l];

  RetrievalResult res;
  std::vector<std::size_t> order;
  std::vector<double> dist(n);
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t r = class_size[labels[q]] - 1;
    if (r == 0) {
      res.skipped.push_back(q);
      continue;
    }
    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == q) continue;
      double s = 0;
      for (std::size_t k = 0; k < emb[q].size(); ++k) {
        double d = emb[q][k] - emb[i][k];
        s += d * d;
      }
      dist[i] = s;
      order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    std::vector<bool> rel(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rel[i] = labels[order[i]] == labels[q];

    QueryResult qr;
    qr.item = q;
    qr.r = r;
    std::size_t hits = 0;
    double sum = 0;
    for (std::size_t i = 0; i < r; ++i) {
      if (!rel[i]) continue;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    qr.map_at_r = sum / static_cast<double>(r);
    qr.ap = average_precision(rel).value_or(0.0);
    res.queries.push_back(qr);
  }
  if (!res.queries.empty()) {
    for (const auto& q : res.queries) {
      res.map_at_r += q.map_at_r;
      res.ap += q.ap;
    }
    res.map_at_r /= static_cast<double>(res.queries.size());
    res.ap /= static_cast<double>(res.queries.size());
  }
  return res;
}

double map_at_r(const std::vector<std::vector<double>>& embeddings, const std::vector<std::string>& labels) {
  return retrieval_metrics(embeddings, labels).map_at_r;
}

}  // namespace irforge::embed
