#include "irforge/embed/pipeline.hpp"

#include <map>
#include <stdexcept>

#include "irforge/rng.hpp"

namespace irforge::embed {

const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::Src: return "src";
    case EvalMode::SrcO0: return "src+o0";
    case EvalMode::SrcTopk: return "src+topk";
  }
  return "src";
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  if (s == "src") return EvalMode::Src;
  if (s == "src+o0") return EvalMode::SrcO0;
  if (s == "src+topk") return EvalMode::SrcTopk;
  return std::nullopt;
}

EvalOutcome run_eval(const std::vector<EvalItem>& items, EvalMode mode, const EvalConfig& cfg) {
  EvalOutcome out;
  out.mode = mode;

  std::vector<SparseVec> table;
  std::vector<std::size_t> train_items;
  std::map<std::string, std::vector<std::size_t>> by_class;  // train item -> table row
  std::vector<std::size_t> source_row(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    source_row[i] = table.size();
    table.push_back(items[i].source);
    if (!items[i].test) {
      train_items.push_back(i);
      by_class[items[i].label].push_back(i);
    }
  }
  std::vector<std::string> classes;
  for (const auto& [c, _] : by_class) classes.push_back(c);

  auto negative_for = [&](const std::string& label, Rng& rng) -> std::optional<std::size_t> {
    if (classes.size() < 2) return std::nullopt;
    std::size_t c;
    do {
      c = rng.below(classes.size());
    } while (classes[c] == label);
    const auto& members = by_class[classes[c]];
    return members[rng.below(members.size())];
  };

  std::vector<Triplet> batch;
  Rng src_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
  for (std::size_t i : train_items) {
    const auto& same = by_class[items[i].label];
    if (same.size() < 2) continue;
    for (std::size_t k = 0; k < cfg.source_triplets_per_program; ++k) {
      std::size_t p;
      do {
        p = same[src_rng.below(same.size())];
      } while (p == i);
      auto n = negative_for(items[i].label, src_rng);
      if (!n) continue;
      batch.push_back({source_row[i], source_row[p], source_row[*n]});
    }
  }
  out.source_triplets = batch.size();

  if (mode != EvalMode::Src) {
    Rng ir_rng(cfg.seed * 0xbf58476d1ce4e5b9ULL + 2);
    for (std::size_t i : train_items) {
      for (const auto& ir : items[i].irs) {
        auto n = negative_for(items[i].label, ir_rng);
        if (!n) continue;
        std::size_t row = table.size();
        table.push_back(ir);
        batch.push_back({row, source_row[i], source_row[*n]});
        ++out.ir_triplets;
      }
    }
  }
  if (batch.empty()) throw std::runtime_error("no training triplets: need at least two training classes with two members");

  const std::size_t dim = items.front().source.dim;
  auto model = TripletModel::init(dim, cfg.out, cfg.margin, cfg.seed);
  auto history = train(model, table, batch, cfg.train);
  out.initial_loss = history.front();
  out.final_loss = history.back();

  std::map<std::string, std::size_t> test_count;
  for (const auto& it : items)
    if (it.test) ++test_count[it.label];
  std::vector<std::vector<double>> emb;
  std::vector<std::string> labels;
  for (const auto& it : items) {
    if (!it.test) continue;
    if (test_count[it.label] < 2) continue;
    emb.push_back(model.embed(it.source));
    labels.push_back(it.label);
  }
  for (const auto& [c, n] : test_count)
    if (n < 2) out.excluded_classes.push_back(c);
  out.test_items = emb.size();
  if (emb.size() >= 2) out.retrieval = retrieval_metrics(emb, labels);
  return out;
}

}  // namespace irforge::embed
