#include "irforge/fitness.hpp"

#include <set>

#include <fmt/core.h>

#include "irforge/fsutil.hpp"
#include "irforge/log.hpp"
#include "irforge/srcgraph.hpp"

namespace irforge {

const char* to_string(SrcProxy p) {
  switch (p) {
    case SrcProxy::Fallback: return "o0";
    case SrcProxy::Always: return "always";
    case SrcProxy::Off: return "off";
  }
  return "o0";
}

std::optional<SrcProxy> parse_src_proxy(std::string_view s) {
  if (s == "o0" || s == "fallback") return SrcProxy::Fallback;
  if (s == "always") return SrcProxy::Always;
  if (s == "off" || s == "none") return SrcProxy::Off;
  return std::nullopt;
}

nlohmann::json ProgramScore::to_json() const {
  return {{"program", program_id}, {"sim_g", sim_g},   {"oov_base", oov_base},
          {"oov_opt", oov_opt},    {"oov_multiplier", oov_multiplier}, {"score", score},
          {"status", status},      {"source_proxied", source_proxied}};
}

nlohmann::json FitnessReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : per_program) rows.push_back(p.to_json());
  return {{"genome", genome}, {"aggregate_F", aggregate}, {"failures", failures},
          {"quarantined", quarantined}, {"per_program", rows}};
}

std::string FitnessReport::to_tsv() const {
  std::string out = "program\tsim_g\toov_base\toov_opt\tscore\tstatus\n";
  for (const auto& p : per_program)
    out += fmt::format("{}\t{:.17g}\t{}\t{}\t{:.17g}\t{}\n", p.program_id, p.sim_g, p.oov_base, p.oov_opt, p.score, p.status);
  return out;
}

double aggregate_scores(const std::vector<ProgramScore>& scores) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : scores) {
    if (s.quarantined) continue;
    sum += s.score;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

FitnessEvaluator::FitnessEvaluator(Compiler& compiler, const FlagCatalog& catalog, const Vocabulary& vocab,
                                   FitnessConfig config)
    : compiler_(compiler), catalog_(catalog), vocab_(vocab), config_(config) {}

namespace {

std::map<std::string, SpGraph> per_function(const Cfg& g, bool directed) {
  std::map<std::string, SpGraph> out;
  for (const auto& f : g.functions()) out.emplace(f.name, shortest_paths(g.function_subgraph(f.name), directed));
  return out;
}

}  // namespace

void FitnessEvaluator::prepare(const std::vector<const ProgramRecord*>& programs) {
  programs_.assign(programs.size(), {});
  const auto n = static_cast<long>(programs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto& p = programs_[static_cast<std::size_t>(i)];
    p.record = programs[static_cast<std::size_t>(i)];
    auto out = compiler_.compile_baseline(*p.record);
    if (out.status != CompileStatus::Ok) {
      p.quarantined = true;
      p.quarantine_reason = to_string(out.status);
      continue;
    }
    p.baseline = std::move(out.ir);
    try {
      p.base_module = parse_ir(p.baseline->text);
    } catch (const ParseError& e) {
      p.quarantined = true;
      p.quarantine_reason = std::string("ir parse error: ") + e.what();
      continue;
    }
    const bool directed = config_.kernel.directed;
    std::optional<Cfg> src;
    bool try_source = config_.src_proxy != SrcProxy::Always && p.record->language == Language::C;
    if (try_source) {
      try {
        Cfg g = source_cfg(read_file(p.record->source_path));
        if (!g.functions().empty()) src = std::move(g);
      } catch (const ParseError& e) {
        log::debug("{}: source parse failed: {}", p.record->id, e.what());
      }
    }
    if (!src) {
      if (config_.src_proxy == SrcProxy::Off) {
        p.quarantined = true;
        p.quarantine_reason = "source parse error";
        continue;
      }
      src = ir_cfg(p.base_module);
      p.source_proxied = true;
    }
    p.source_graph = shortest_paths(*src, directed);
    if (config_.function_pairs) p.source_functions = per_function(*src, directed);
    if (config_.vocab_scope == VocabScope::Program) {
      p.own_vocab = std::make_shared<Vocabulary>(build_vocab({&p.base_module}));
      p.base_oov = count_oov(p.base_module, *p.own_vocab);
    } else {
      p.base_oov = count_oov(p.base_module, vocab_);
    }
  }
  std::size_t q = 0;
  for (const auto& p : programs_)
    if (p.quarantined) {
      ++q;
      log::warn("quarantined {}: {}", p.record->id, p.quarantine_reason);
    }
  if (q == programs_.size() && q > 0) log::warn("every program in the evaluation set is quarantined; fitness is 0");
}

double FitnessEvaluator::graph_similarity(const PreparedProgram& p, const IrModule& m) const {
  const Cfg g = ir_cfg(m);
  if (!config_.function_pairs) return similarity(p.source_graph, shortest_paths(g, config_.kernel.directed), config_.kernel.labeled);
  if (p.source_functions.empty()) return 0.0;
  double sum = 0;
  for (const auto& [name, sg] : p.source_functions) {
    bool present = false;
    for (const auto& f : g.functions()) present |= f.name == name;
    if (!present) continue;
    sum += similarity(sg, shortest_paths(g.function_subgraph(name), config_.kernel.directed), config_.kernel.labeled);
  }
  return sum / static_cast<double>(p.source_functions.size());
}

std::optional<IrText> FitnessEvaluator::optimized_ir(std::size_t index, const FlagVector& v, CompileStatus* status) {
  const auto& p = programs_.at(index);
  if (p.quarantined || !p.baseline) {
    if (status) *status = CompileStatus::CompileError;
    return std::nullopt;
  }
  auto out = compiler_.optimize(*p.baseline, v, catalog_);
  if (status) *status = out.status;
  return out.ir;
}

ProgramScore FitnessEvaluator::compute(std::size_t index, const FlagVector& v) {
  const auto& p = programs_.at(index);
  ProgramScore s;
  s.program_id = p.record ? p.record->id : std::string();
  s.source_proxied = p.source_proxied;
  if (p.quarantined) {
    s.status = "quarantined";
    s.quarantined = true;
    return s;
  }
  s.oov_base = p.base_oov.oov;
  CompileStatus st = CompileStatus::Ok;
  auto ir = optimized_ir(index, v, &st);
  if (!ir) {
    s.status = to_string(st);
    return s;
  }

  std::pair<std::size_t, std::string> ir_key{index, ir->digest};
  std::optional<IrResult> cached;
  {
    std::lock_guard lock(memo_mutex_);
    auto it = by_ir_.find(ir_key);
    if (it != by_ir_.end()) cached = it->second;
  }
  IrResult r{};
  if (cached) {
    r = *cached;
  } else {
    IrModule m;
    try {
      m = parse_ir(ir->text);
    } catch (const ParseError&) {
      s.status = "parse_error";
      return s;
    }
    r.sim_g = graph_similarity(p, m);
    r.oov = count_oov(m, p.own_vocab ? *p.own_vocab : vocab_);
    std::lock_guard lock(memo_mutex_);
    by_ir_.emplace(ir_key, r);
  }
  s.sim_g = r.sim_g;
  s.oov_opt = r.oov.oov;
  try {
    s.oov_multiplier = oov_ratio(p.base_oov, r.oov, config_.oov);
  } catch (const std::domain_error&) {
    s.status = "oov_undefined";
    return s;
  }
  s.score = s.sim_g * s.oov_multiplier;
  return s;
}

ProgramScore FitnessEvaluator::program_fitness(std::size_t index, const FlagVector& v) {
  std::pair<std::size_t, std::string> key{index, v.digest()};
  {
    std::lock_guard lock(memo_mutex_);
    auto it = by_genome_.find(key);
    if (it != by_genome_.end()) {
      ++memo_hits_;
      return it->second;
    }
  }
  ProgramScore s = compute(index, v);
  std::lock_guard lock(memo_mutex_);
  by_genome_.emplace(key, s);
  return s;
}

FitnessReport FitnessEvaluator::assemble(const FlagVector& v, std::vector<ProgramScore> scores) const {
  FitnessReport r;
  r.genome = v.to_string();
  r.per_program = std::move(scores);
  for (const auto& s : r.per_program) {
    if (s.quarantined) {
      ++r.quarantined;
    } else if (s.status != "ok") {
      ++r.failures;
    }
  }
  r.aggregate = aggregate_scores(r.per_program);
  return r;
}

FitnessReport FitnessEvaluator::sequence_fitness(const FlagVector& v) { return evaluate_batch({v}).front(); }

std::vector<FitnessReport> FitnessEvaluator::evaluate_batch(const std::vector<FlagVector>& genomes) {
  const std::size_t np = programs_.size();
  if (np == 0) {
    std::vector<FitnessReport> empty;
    for (const auto& g : genomes) empty.push_back(assemble(g, {}));
    return empty;
  }
  std::vector<ProgramScore> flat(genomes.size() * np);
  const auto total = static_cast<long>(flat.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < total; ++k) {
    auto uk = static_cast<std::size_t>(k);
    flat[uk] = program_fitness(uk % np, genomes[uk / np]);
  }
  std::vector<FitnessReport> out;
  out.reserve(genomes.size());
  for (std::size_t g = 0; g < genomes.size(); ++g) {
    std::vector<ProgramScore> scores(flat.begin() + static_cast<long>(g * np), flat.begin() + static_cast<long>((g + 1) * np));
    out.push_back(assemble(genomes[g], std::move(scores)));
  }
  return out;
}

}  // namespace irforge
