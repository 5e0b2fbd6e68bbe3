#include "irforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "irforge/digest.hpp"
#include "irforge/fsutil.hpp"
#include "irforge/log.hpp"
#include "irforge/rng.hpp"

namespace irforge {

namespace {

std::optional<Language> language_of(const fs::path& p) {
  auto ext = p.extension().string();
  if (ext == ".c") return Language::C;
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx") return Language::Cxx;
  return std::nullopt;
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'relative/path<TAB>class_label'");
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

const char* split_mode_name(SplitMode m) { return m == SplitMode::ByClass ? "by-class" : "by-record"; }

}  // namespace

const ProgramRecord* Corpus::find(const std::string& id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const ProgramRecord& r, const std::string& k) { return r.id < k; });
  return (it != records.end() && it->id == id) ? &*it : nullptr;
}

std::vector<const ProgramRecord*> Corpus::in_split(Split split) const {
  std::vector<const ProgramRecord*> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(&r);
  return out;
}

std::vector<std::string> Corpus::class_labels() const {
  std::set<std::string> labels;
  for (const auto& r : records) labels.insert(r.class_label);
  return {labels.begin(), labels.end()};
}

void Corpus::assign_split(SplitMode mode, double fraction, std::uint64_t seed) {
  if (fraction < 0 || fraction >= 1) throw std::invalid_argument("test fraction must be in [0,1)");
  split_mode = mode;
  test_fraction = fraction;
  split_seed = seed;
  for (auto& r : records) r.split = Split::Train;

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) by_class[records[i].class_label].push_back(i);

  Rng rng(seed);
  if (mode == SplitMode::ByRecord) {
    for (auto& [label, members] : by_class) {
      auto n = members.size();
      auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
      n_test = std::min(n_test, n - 1);
      for (auto pick : rng.sample_distinct(n, n_test)) records[members[pick]].split = Split::Test;
    }
  } else {
    auto n = by_class.size();
    auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    n_test = std::min(n_test, n - 1);
    std::vector<const std::vector<std::size_t>*> classes;
    for (auto& [label, members] : by_class) classes.push_back(&members);
    for (auto pick : rng.sample_distinct(n, n_test))
      for (auto i : *classes[pick]) records[i].split = Split::Test;
  }
}

nlohmann::json Corpus::to_json() const {
  nlohmann::json j;
  j["format"] = "irforge-corpus";
  j["version"] = 1;
  j["root"] = root.string();
  j["split"] = {{"mode", split_mode_name(split_mode)},
                {"test_fraction", test_fraction},
                {"seed", split_seed}};
  auto& arr = j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"id", r.id},
                   {"class", r.class_label},
                   {"sha256", r.content_hash},
                   {"language", r.language == Language::C ? "c" : "c++"},
                   {"split", r.split == Split::Train ? "train" : "test"}});
  }
  return j;
}

Corpus Corpus::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "irforge-corpus" || j.value("version", 0) != 1)
    throw std::runtime_error("unsupported corpus index format");
  Corpus c;
  c.root = j.at("root").get<std::string>();
  const auto& s = j.at("split");
  c.split_mode = s.at("mode") == "by-class" ? SplitMode::ByClass : SplitMode::ByRecord;
  c.test_fraction = s.at("test_fraction").get<double>();
  c.split_seed = s.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("records")) {
    ProgramRecord r;
    r.id = e.at("id").get<std::string>();
    r.source_path = c.root / r.id;
    r.class_label = e.at("class").get<std::string>();
    r.content_hash = e.at("sha256").get<std::string>();
    r.language = e.at("language") == "c" ? Language::C : Language::Cxx;
    r.split = e.at("split") == "train" ? Split::Train : Split::Test;
    c.records.push_back(std::move(r));
  }
  return c;
}

std::string Corpus::serialize() const { return to_json().dump(2) + "\n"; }

Corpus ingest(const fs::path& root_in, const IngestOptions& options, IngestReport* report) {
  std::error_code ec;
  if (!fs::is_directory(root_in, ec)) throw std::runtime_error("corpus root is not a directory: " + root_in.string());
  const fs::path root = fs::canonical(root_in);

  IngestReport local;
  IngestReport& rep = report ? *report : local;

  std::optional<std::map<std::string, std::string>> manifest;
  if (options.manifest) manifest = read_manifest(*options.manifest);

  std::vector<std::pair<std::string, std::string>> candidates;  // (relative id, label)
  if (manifest) {
    for (const auto& [rel, label] : *manifest) {
      if (!language_of(rel)) {
        rep.skipped.push_back({rel, "unsupported extension"});
        continue;
      }
      candidates.emplace_back(fs::path(rel).lexically_normal().generic_string(), label);
    }
  } else {
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file(ec) || !language_of(it->path())) continue;
      auto rel = fs::relative(it->path(), root).generic_string();
      auto parent = it->path().parent_path();
      std::string label = parent == root ? std::string("_root") : parent.filename().string();
      candidates.emplace_back(rel, label);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  Corpus corpus;
  corpus.root = root;
  for (const auto& [rel, label] : candidates) {
    ProgramRecord r;
    r.id = rel;
    r.source_path = root / rel;
    r.class_label = label;
    r.language = *language_of(rel);
    try {
      r.content_hash = sha256_hex(read_file(r.source_path));
    } catch (const std::exception& e) {
      log::warn("skipping {}: {}", rel, e.what());
      rep.skipped.push_back({rel, "unreadable"});
      continue;
    }
    corpus.records.push_back(std::move(r));
  }
  if (corpus.records.empty()) throw std::runtime_error("empty corpus: no readable C/C++ sources under " + root.string());
  corpus.assign_split(options.split_mode, options.test_fraction, options.split_seed);
  return corpus;
}

nlohmann::json ValidationSet::to_json() const {
  return {{"seed", seed}, {"fraction", fraction}, {"stratified", stratified}, {"members", member_ids}};
}

ValidationSet ValidationSet::from_json(const nlohmann::json& j) {
  ValidationSet vs;
  vs.seed = j.at("seed").get<std::uint64_t>();
  vs.fraction = j.at("fraction").get<double>();
  vs.stratified = j.at("stratified").get<bool>();
  vs.member_ids = j.at("members").get<std::vector<std::string>>();
  return vs;
}

ValidationSet sample_validation(const Corpus& corpus, double fraction, std::uint64_t seed, bool stratified) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("validation fraction must be in (0, 1]");
  auto train = corpus.in_split(Split::Train);
  if (train.empty()) throw std::invalid_argument("train split is empty");

  const auto total = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size()))));
  ValidationSet vs;
  vs.seed = seed;
  vs.fraction = fraction;
  vs.stratified = stratified;

  Rng rng(seed);
  std::vector<bool> chosen(train.size(), false);
  if (!stratified) {
    for (auto i : rng.sample_distinct(train.size(), total)) chosen[i] = true;
  } else {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) by_class[train[i]->class_label].push_back(i);
    struct Share {
      const std::vector<std::size_t>* members;
      std::size_t base;
      double remainder;
      std::size_t order;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (auto& [label, members] : by_class) {
      double exact = static_cast<double>(total) * static_cast<double>(members.size()) /
                     static_cast<double>(train.size());
      auto base = static_cast<std::size_t>(std::floor(exact));
      shares.push_back({&members, base, exact - static_cast<double>(base), shares.size()});
      assigned += base;
    }
    std::vector<Share*> by_rem;
    for (auto& s : shares) by_rem.push_back(&s);
    std::stable_sort(by_rem.begin(), by_rem.end(),
                     [](const Share* a, const Share* b) { return a->remainder > b->remainder; });
    for (std::size_t i = 0; assigned < total && i < by_rem.size(); ++i, ++assigned) by_rem[i]->base++;
    for (const auto& s : shares)
      for (auto pick : rng.sample_distinct(s.members->size(), std::min(s.base, s.members->size())))
        chosen[(*s.members)[pick]] = true;
  }
  for (std::size_t i = 0; i < train.size(); ++i)
    if (chosen[i]) vs.member_ids.push_back(train[i]->id);
  return vs;
}

}  // namespace irforge
