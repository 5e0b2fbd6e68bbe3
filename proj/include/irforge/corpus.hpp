#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace irforge {

enum class Split { Train, Test };
enum class SplitMode { ByRecord, ByClass };
enum class Language { C, Cxx };

struct ProgramRecord {
  std::string id;                    // path relative to the corpus root, '/'-separated
  std::filesystem::path source_path; // absolute
  std::string class_label;
  std::string content_hash;          // SHA-256 of the source bytes, hex
  Language language = Language::C;
  Split split = Split::Train;
};

struct IngestIssue {
  std::string path;
  std::string reason;
};

struct IngestReport {
  std::vector<IngestIssue> skipped;
};

struct IngestOptions {
  std::optional<std::filesystem::path> manifest;
  SplitMode split_mode = SplitMode::ByRecord;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 20230101;
};

class Corpus {
 public:
  std::filesystem::path root;
  std::vector<ProgramRecord> records;  // lexicographic by id
  SplitMode split_mode = SplitMode::ByRecord;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;

  const ProgramRecord* find(const std::string& id) const;
  std::vector<const ProgramRecord*> in_split(Split split) const;
  std::vector<std::string> class_labels() const;

  /// Reassigns every record to train or test. Deterministic in
  /// (records, mode, test_fraction, seed).
  void assign_split(SplitMode mode, double test_fraction, std::uint64_t seed);

  nlohmann::json to_json() const;
  static Corpus from_json(const nlohmann::json& j);
  std::string serialize() const;
};

/// Walks `root` for .c/.cc/.cpp/.cxx files. With a manifest, only listed
/// files are ingested and labeled by it; otherwise the parent directory name
/// is the class label. Throws when no record survives.
Corpus ingest(const std::filesystem::path& root, const IngestOptions& options = {},
              IngestReport* report = nullptr);

struct ValidationSet {
  std::vector<std::string> member_ids;  // corpus order
  std::uint64_t seed = 0;
  double fraction = 0.05;
  bool stratified = false;

  nlohmann::json to_json() const;
  static ValidationSet from_json(const nlohmann::json& j);
};

/// Draws round(fraction * |train|) (at least 1) train records without
/// replacement. Stratified mode apportions the draw across classes by
/// largest remainder, preserving the total.
ValidationSet sample_validation(const Corpus& corpus, double fraction, std::uint64_t seed,
                                bool stratified = false);

}  // namespace irforge
