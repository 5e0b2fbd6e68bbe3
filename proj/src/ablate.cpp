#include "irforge/ablate.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/core.h>

#include "irforge/format.hpp"

namespace irforge {

const char* to_string(FlagCategory c) {
  switch (c) {
    case FlagCategory::StatementSimplify: return "statement-simplify";
    case FlagCategory::SourceProximate: return "source-proximate";
    case FlagCategory::CfgSimplify: return "cfg-simplify";
    case FlagCategory::Other: return "other";
  }
  return "other";
}

std::optional<FlagCategory> parse_category(std::string_view s) {
  for (auto c : {FlagCategory::StatementSimplify, FlagCategory::SourceProximate, FlagCategory::CfgSimplify,
                 FlagCategory::Other})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

CategoryMap CategoryMap::defaults() {
  CategoryMap m;
  for (auto f : {"-dce", "-early-cse", "-reassociate", "-bdce", "-loop-deletion"}) m.set(f, FlagCategory::StatementSimplify);
  for (auto f : {"-mem2reg", "-instcombine", "-dse"}) m.set(f, FlagCategory::SourceProximate);
  for (auto f : {"-break-crit-edges", "-simplifycfg", "-loop-rotate"}) m.set(f, FlagCategory::CfgSimplify);
  return m;
}

CategoryMap CategoryMap::parse(std::string_view text) {
  CategoryMap m;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw std::runtime_error(fmt::format("category map line {}: expected flag<TAB>category", lineno));
    auto cat = parse_category(line.substr(tab + 1));
    if (!cat) throw std::runtime_error(fmt::format("category map line {}: unknown category", lineno));
    std::string flag(line.substr(0, tab));
    if (flag.empty() || flag[0] != '-') flag = "-" + flag;
    m.set(std::move(flag), *cat);
  }
  return m;
}

FlagCategory CategoryMap::category(std::string_view flag) const {
  auto it = map_.find(flag);
  return it == map_.end() ? FlagCategory::Other : it->second;
}

PotencyReport leave_one_out(const FlagVector& genome, const FlagCatalog& catalog, const GenomeBatchFitness& fitness,
                            const CategoryMap& categories) {
  if (genome.size() != catalog.size()) throw std::invalid_argument("genome length does not match the flag catalog");
  auto enabled = genome.enabled();
  if (enabled.empty()) throw std::invalid_argument("leave-one-out needs a genome with at least one enabled flag");

  std::vector<FlagVector> batch{genome};
  for (auto i : enabled) {
    FlagVector v = genome;
    v.set(i, false);
    batch.push_back(std::move(v));
  }
  auto scores = fitness(batch);
  if (scores.size() != batch.size()) throw std::runtime_error("fitness function returned the wrong number of scores");

  PotencyReport r;
  r.genome = genome.to_string();
  r.fitness = scores[0];
  for (std::size_t k = 0; k < enabled.size(); ++k) {
    const auto& name = catalog.flags[enabled[k]].name;
    r.rows.push_back({name, scores[0], scores[k + 1], scores[0] - scores[k + 1], categories.category(name)});
  }
  std::stable_sort(r.rows.begin(), r.rows.end(), [](const PotencyRow& a, const PotencyRow& b) {
    if (a.delta != b.delta) return a.delta > b.delta;
    return a.flag < b.flag;
  });
  return r;
}

std::string PotencyReport::to_tsv() const {
  std::string out = "# contribution measured in fitness units (leave-one-out)\n";
  out += "flag\tfitness_with\tfitness_without\tdelta\tcategory\n";
  for (const auto& row : rows)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", row.flag, format_double(row.fitness_with),
                       format_double(row.fitness_without), format_double(row.delta), to_string(row.category));
  return out;
}

nlohmann::json PotencyReport::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& row : rows)
    rs.push_back({{"flag", row.flag},
                  {"fitness_with", row.fitness_with},
                  {"fitness_without", row.fitness_without},
                  {"delta", row.delta},
                  {"category", to_string(row.category)}});
  return {{"format", "irforge-potency"}, {"version", 1}, {"unit", "fitness"}, {"genome", genome},
          {"fitness", fitness}, {"rows", rs}};
}

std::string PotencyReport::summary() const {
  std::string out = fmt::format("{} enabled flags, fitness {:.6f} (leave-one-out deltas in fitness units)\n", rows.size(), fitness);
  std::map<std::string, std::pair<std::size_t, double>> per_cat;
  for (const auto& row : rows) {
    auto& [n, sum] = per_cat[to_string(row.category)];
    ++n;
    sum += row.delta;
  }
  for (const auto& [cat, v] : per_cat) out += fmt::format("  {:<20} {:>3} flags, total delta {:+.6f}\n", cat, v.first, v.second);
  std::size_t shown = std::min<std::size_t>(rows.size(), 10);
  out += fmt::format("top {} flags:\n", shown);
  for (std::size_t i = 0; i < shown; ++i)
    out += fmt::format("  {:>2}. {:<28} {:+.6f}  {}\n", i + 1, rows[i].flag, rows[i].delta, to_string(rows[i].category));
  return out;
}

}  // namespace irforge
