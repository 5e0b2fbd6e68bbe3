#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "irforge/compile.hpp"
#include "irforge/flag_vector.hpp"

namespace irforge {

enum class FlagCategory { StatementSimplify, SourceProximate, CfgSimplify, Other };
const char* to_string(FlagCategory c);
std::optional<FlagCategory> parse_category(std::string_view s);

class CategoryMap {
 public:
  /// Built-in table (same content as data/flag_categories.tsv).
  static CategoryMap defaults();
  /// "flag<TAB>category" lines; '#' starts a comment.
  static CategoryMap parse(std::string_view text);

  FlagCategory category(std::string_view flag) const;
  void set(std::string flag, FlagCategory c) { map_[std::move(flag)] = c; }

 private:
  std::map<std::string, FlagCategory, std::less<>> map_;
};

struct PotencyRow {
  std::string flag;
  double fitness_with = 0;
  double fitness_without = 0;
  double delta = 0;  // with - without
  FlagCategory category = FlagCategory::Other;
};

struct PotencyReport {
  std::string genome;
  double fitness = 0;
  std::vector<PotencyRow> rows;  // descending delta

  std::string to_tsv() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

using GenomeBatchFitness = std::function<std::vector<double>(const std::vector<FlagVector>&)>;

/// Scores the genome and every variant with one enabled flag cleared.
PotencyReport leave_one_out(const FlagVector& genome, const FlagCatalog& catalog, const GenomeBatchFitness& fitness,
                            const CategoryMap& categories = CategoryMap::defaults());

}  // namespace irforge
