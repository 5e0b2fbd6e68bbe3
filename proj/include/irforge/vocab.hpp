#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "irforge/irgraph.hpp"

namespace irforge {

// Canonical statements seen in baseline IR, ids dense and lexicographic.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> statements, std::string corpus_digest, std::string toolchain_version);

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }
  std::optional<std::size_t> id(std::string_view text) const;
  bool contains(std::string_view text) const { return id(text).has_value(); }

  const std::string& corpus_digest() const { return corpus_digest_; }
  const std::string& toolchain_version() const { return toolchain_version_; }
  std::string digest() const;

  std::string serialize() const;
  static Vocabulary parse(std::string_view text);

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string corpus_digest_;
  std::string toolchain_version_;
};

/// Throws std::runtime_error when `modules` is empty.
Vocabulary build_vocab(const std::vector<const IrModule*>& modules, std::string corpus_digest = {},
                       std::string toolchain_version = {});

struct OovCount {
  std::size_t total = 0;  // statements
  std::size_t oov = 0;    // occurrences absent from the vocabulary
};

OovCount count_oov(const IrModule& m, const Vocabulary& v);

struct OovOptions {
  bool as_fraction = false;  // oov / total instead of the raw count
  bool smoothing = true;     // add one to numerator and denominator
};

/// (base + 1) / (opt + 1). Without smoothing a zero denominator throws.
double oov_ratio(const OovCount& base, const OovCount& opt, const OovOptions& options = {});

}  // namespace irforge
