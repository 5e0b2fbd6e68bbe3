#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace irforge::embed {

/// Mean of precision@i over relevant positions; nullopt with no relevant item.
std::optional<double> average_precision(const std::vector<bool>& relevance);

struct QueryResult {
  std::size_t item = 0;
  std::size_t r = 0;
  double map_at_r = 0;
  double ap = 0;
};

struct RetrievalResult {
  double map_at_r = 0;
  double ap = 0;
  std::vector<QueryResult> queries;
  std::vector<std::size_t> skipped;  // items whose class has no other member
};

/// Rankings by ascending squared Euclidean distance, query excluded, ties
/// broken by item index.
RetrievalResult retrieval_metrics(const std::vector<std::vector<double>>& embeddings,
                                  const std::vector<std::string>& labels);

double map_at_r(const std::vector<std::vector<double>>& embeddings, const std::vector<std::string>& labels);

}  // namespace irforge::embed
