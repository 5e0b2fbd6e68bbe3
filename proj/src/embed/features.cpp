#include "irforge/embed/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "irforge/digest.hpp"
#include "irforge/srcgraph.hpp"

namespace irforge::embed {

std::vector<double> SparseVec::dense() const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < index.size(); ++k) out[index[k]] = value[k];
  return out;
}

double SparseVec::norm() const {
  double s = 0;
  for (double v : value) s += v * v;
  return std::sqrt(s);
}

SparseVec hash_tokens(const std::vector<std::string>& tokens, const HashingConfig& cfg) {
  std::map<std::uint32_t, double> acc;
  for (const auto& t : tokens) {
    auto h = stable_hash64(t, cfg.seed);
    auto idx = static_cast<std::uint32_t>(h % cfg.dim);
    double sign = (stable_hash64(t, cfg.seed ^ 0x9e3779b97f4a7c15ULL) & 1) ? 1.0 : -1.0;
    acc[idx] += sign;
  }
  SparseVec v;
  v.dim = cfg.dim;
  double n2 = 0;
  for (auto& [i, x] : acc) {
    if (x == 0) continue;
    v.index.push_back(i);
    v.value.push_back(x);
    n2 += x * x;
  }
  if (n2 > 0) {
    double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v.value) x *= inv;
  }
  return v;
}

std::vector<std::string> source_tokens(std::string_view source) {
  auto toks = tokenize_c(source);
  std::vector<std::string> out;
  out.reserve(toks.size() * 2);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    out.push_back(toks[i].text);
    if (i + 1 < toks.size()) out.push_back(toks[i].text + " " + toks[i + 1].text);
  }
  return out;
}

std::vector<std::string> ir_tokens(const IrModule& m) {
  std::vector<std::string> out;
  for (const auto& f : m.functions)
    for (const auto& b : f.blocks)
      for (const auto& s : b.statements) out.push_back(s.text);
  return out;
}

SparseVec featurize_source(std::string_view source, const HashingConfig& cfg) { return hash_tokens(source_tokens(source), cfg); }

SparseVec featurize_ir(const IrModule& m, const HashingConfig& cfg) { return hash_tokens(ir_tokens(m), cfg); }

std::vector<SparseVec> featurize_sources(const std::vector<std::string>& sources, const HashingConfig& cfg) {
  std::vector<SparseVec> out(sources.size());
  const auto n = static_cast<long>(sources.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = featurize_source(sources[static_cast<std::size_t>(i)], cfg);
  return out;
}

std::vector<SparseVec> featurize_sources_serial(const std::vector<std::string>& sources, const HashingConfig& cfg) {
  std::vector<SparseVec> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(featurize_source(s, cfg));
  return out;
}

}  // namespace irforge::embed
