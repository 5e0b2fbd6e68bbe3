#include "irforge/vocab.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "irforge/digest.hpp"

namespace irforge {

Vocabulary::Vocabulary(std::vector<std::string> statements, std::string corpus_digest, std::string toolchain_version)
    : corpus_digest_(std::move(corpus_digest)), toolchain_version_(std::move(toolchain_version)) {
  std::sort(statements.begin(), statements.end());
  statements.erase(std::unique(statements.begin(), statements.end()), statements.end());
  entries_ = std::move(statements);
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i], i);
}

std::optional<std::size_t> Vocabulary::id(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::digest() const {
  Sha256 h;
  h.field("vocab-v1");
  for (const auto& e : entries_) h.field(e);
  return h.hex();
}

std::string Vocabulary::serialize() const {
  std::string out = "# irforge-vocab v1\n";
  out += "# digest " + digest() + "\n";
  out += "# corpus " + corpus_digest_ + "\n";
  out += "# toolchain " + toolchain_version_ + "\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) out += fmt::format("{}\t{}\n", i, entries_[i]);
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> statements;
  std::string corpus, toolchain, digest;
  bool header = false;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++lineno;
    if (lineno == 1) {
      if (line != "# irforge-vocab v1") throw std::runtime_error("not an irforge vocabulary file");
      header = true;
      continue;
    }
    if (line.rfind("# digest ", 0) == 0) {
      digest = std::string(line.substr(9));
      continue;
    }
    if (line.rfind("# corpus ", 0) == 0) {
      corpus = std::string(line.substr(9));
      continue;
    }
    if (line.rfind("# toolchain ", 0) == 0) {
      toolchain = std::string(line.substr(12));
      continue;
    }
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw std::runtime_error(fmt::format("vocabulary line {}: missing tab", lineno));
    if (std::stoul(std::string(line.substr(0, tab))) != statements.size())
      throw std::runtime_error(fmt::format("vocabulary line {}: ids are not dense", lineno));
    statements.emplace_back(line.substr(tab + 1));
  }
  if (!header) throw std::runtime_error("empty vocabulary file");
  Vocabulary v(std::move(statements), std::move(corpus), std::move(toolchain));
  if (!digest.empty() && digest != v.digest()) throw std::runtime_error("vocabulary digest mismatch");
  return v;
}

Vocabulary build_vocab(const std::vector<const IrModule*>& modules, std::string corpus_digest,
                       std::string toolchain_version) {
  if (modules.empty()) throw std::runtime_error("zero compilable programs: cannot build a vocabulary");
  std::set<std::string> seen;
  for (const auto* m : modules)
    for (const auto& f : m->functions)
      for (const auto& b : f.blocks)
        for (const auto& s : b.statements) seen.insert(s.text);
  return Vocabulary({seen.begin(), seen.end()}, std::move(corpus_digest), std::move(toolchain_version));
}

OovCount count_oov(const IrModule& m, const Vocabulary& v) {
  OovCount c;
  for (const auto& f : m.functions)
    for (const auto& b : f.blocks)
      for (const auto& s : b.statements) {
        ++c.total;
        if (!v.contains(s.text)) ++c.oov;
      }
  return c;
}

double oov_ratio(const OovCount& base, const OovCount& opt, const OovOptions& options) {
  auto value = [&](const OovCount& c) {
    if (!options.as_fraction) return static_cast<double>(c.oov);
    return c.total == 0 ? 0.0 : static_cast<double>(c.oov) / static_cast<double>(c.total);
  };
  double num = value(base), den = value(opt);
  if (options.smoothing) {
    num += 1.0;
    den += 1.0;
  } else if (den == 0.0) {
    throw std::domain_error("OOV ratio undefined: optimized module has no OOV statements (smoothing disabled)");
  }
  return num / den;
}

}  // namespace irforge
