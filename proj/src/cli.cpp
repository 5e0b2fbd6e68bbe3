#include "irforge/cli.hpp"

#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <set>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "irforge/ablate.hpp"
#include "irforge/compile.hpp"
#include "irforge/corpus.hpp"
#include "irforge/digest.hpp"
#include "irforge/embed/pipeline.hpp"
#include "irforge/fitness.hpp"
#include "irforge/format.hpp"
#include "irforge/fsutil.hpp"
#include "irforge/ga.hpp"
#include "irforge/irgraph.hpp"
#include "irforge/log.hpp"
#include "irforge/vocab.hpp"
#include "irforge/workspace.hpp"

namespace irforge {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Text, Tsv, Json };

std::optional<fs::path> self_dir() {
  std::error_code ec;
  auto exe = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return std::nullopt;
  return exe.parent_path();
}

struct CommonOpts {
  int jobs = 0;
  bool verbose = false;
  bool quiet = false;
  bool verify_cache = false;
  std::string format = "text";

  Format fmt() const { return format == "json" ? Format::Json : format == "tsv" ? Format::Tsv : Format::Text; }
  void apply() const {
    if (jobs > 0) omp_set_num_threads(jobs);
    if (verbose) log::level() = log::Level::Info;
    if (quiet) log::level() = log::Level::Quiet;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool reports) {
  cmd->add_option("--jobs,-j", o.jobs, "Worker threads (default: logical CPU count)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--verbose,-v", o.verbose, "Progress messages on stderr");
  cmd->add_flag("--quiet,-q", o.quiet, "Suppress warnings");
  cmd->add_flag("--verify-cache", o.verify_cache, "Recompile about 1% of cache hits and compare digests");
  if (reports) cmd->add_option("--format", o.format, "Report format on stdout")->check(CLI::IsMember({"text", "tsv", "json"}));
}

struct FitnessOpts {
  bool unlabeled = false;
  bool undirected = false;
  bool function_pairs = false;
  bool oov_as_fraction = false;
  bool no_smoothing = false;
  std::string vocab_scope = "corpus";
  std::string src_proxy = "o0";

  FitnessConfig config() const {
    FitnessConfig c;
    c.kernel.labeled = !unlabeled;
    c.kernel.directed = !undirected;
    c.function_pairs = function_pairs;
    c.oov.as_fraction = oov_as_fraction;
    c.oov.smoothing = !no_smoothing;
    c.vocab_scope = vocab_scope == "program" ? VocabScope::Program : VocabScope::Corpus;
    c.src_proxy = *parse_src_proxy(src_proxy);
    return c;
  }
  json to_json() const {
    return {{"unlabeled", unlabeled},           {"undirected", undirected},       {"function_pairs", function_pairs},
            {"oov_as_fraction", oov_as_fraction}, {"no_smoothing", no_smoothing}, {"vocab_scope", vocab_scope},
            {"src_proxy", src_proxy}};
  }
  static FitnessOpts from_json(const json& j) {
    FitnessOpts o;
    o.unlabeled = j.value("unlabeled", false);
    o.undirected = j.value("undirected", false);
    o.function_pairs = j.value("function_pairs", false);
    o.oov_as_fraction = j.value("oov_as_fraction", false);
    o.no_smoothing = j.value("no_smoothing", false);
    o.vocab_scope = j.value("vocab_scope", "corpus");
    o.src_proxy = j.value("src_proxy", "o0");
    return o;
  }
};

void add_fitness(CLI::App* cmd, FitnessOpts& o) {
  cmd->add_flag("--unlabeled", o.unlabeled, "Ignore node kinds in the graph kernel");
  cmd->add_flag("--undirected", o.undirected, "Undirected shortest paths");
  cmd->add_flag("--function-pairs", o.function_pairs, "Compare per-function graphs instead of whole modules");
  cmd->add_flag("--oov-as-fraction", o.oov_as_fraction, "OOV rate as a fraction of statements");
  cmd->add_flag("--no-smoothing", o.no_smoothing, "Unsmoothed OOV ratio (zero denominator is an error)");
  cmd->add_option("--vocab-scope", o.vocab_scope, "Baseline vocabulary scope")->check(CLI::IsMember({"corpus", "program"}));
  cmd->add_option("--src-proxy", o.src_proxy, "Source graph policy: o0 (fall back to the -O0 IR graph), always, off")
      ->check(CLI::IsMember({"o0", "fallback", "always", "off", "none"}));
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == ':' || c == '\\') c = '_';
  return s;
}

// --- shared loading ---------------------------------------------------------

struct Session {
  Workspace ws;
  Corpus corpus;
  FlagCatalog catalog;
  Vocabulary vocab;
  std::unique_ptr<Compiler> compiler;
};

Session open_session(const fs::path& root, const CommonOpts& common) {
  auto ws = Workspace::open(root);
  ws.require(ws.corpus(), "build");
  ws.require(ws.flags(), "build");
  ws.require(ws.vocab(), "build");
  Session s{ws, Corpus::from_json(json::parse(read_file(ws.corpus()))),
            FlagCatalog::from_json(json::parse(read_file(ws.flags()))), Vocabulary::parse(read_file(ws.vocab())), nullptr};
  auto tc = Toolchain::resolve(self_dir());
  if (tc.version != s.catalog.toolchain_version)
    log::warn("toolchain differs from the one used by `build` ({} vs {})", tc.version, s.catalog.toolchain_version);
  s.compiler = std::make_unique<Compiler>(tc, ws.cache(), CompilerOptions{.verify_cache = common.verify_cache});
  return s;
}

std::vector<const ProgramRecord*> members(const Corpus& corpus, const ValidationSet& vs) {
  std::vector<const ProgramRecord*> out;
  for (const auto& id : vs.member_ids) {
    const auto* r = corpus.find(id);
    if (!r) throw WorkspaceError("validation member " + id + " is not in the corpus index");
    out.push_back(r);
  }
  return out;
}

void report_cache(const Compiler& c) {
  auto st = c.stats();
  log::info("cache: {} hits, {} misses", st.hits, st.misses);
  if (st.verified > 0)
    fmt::print(stderr, "cache verification: {} re-run, {} mismatches\n", st.verified, st.mismatches);
}

// --- build ------------------------------------------------------------------

struct BuildOpts {
  std::string corpus;
  std::string manifest;
  std::string workspace;
  std::string split = "record";
  double test_fraction = 0.3;
  std::uint64_t split_seed = 20230101;
  std::string allow_file, deny_file;
  bool no_default_deny = false;
};

int cmd_build(const BuildOpts& o, const CommonOpts& common) {
  auto tc = Toolchain::resolve(self_dir());
  auto ws = Workspace::create(o.workspace);

  IngestOptions io;
  if (!o.manifest.empty()) io.manifest = o.manifest;
  io.split_mode = o.split == "class" ? SplitMode::ByClass : SplitMode::ByRecord;
  io.test_fraction = o.test_fraction;
  io.split_seed = o.split_seed;
  IngestReport ingest_report;
  Corpus corpus = ingest(o.corpus, io, &ingest_report);
  for (const auto& s : ingest_report.skipped) log::warn("skipped {}: {}", s.path, s.reason);

  Compiler compiler(tc, ws.cache(), {.verify_cache = common.verify_cache});
  const std::size_t n = corpus.records.size();
  std::vector<CompileOutcome> outcomes(n);
  std::vector<std::optional<IrModule>> modules(n);
  std::vector<std::string> parse_errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    auto ui = static_cast<std::size_t>(i);
    outcomes[ui] = compiler.compile_baseline(corpus.records[ui]);
    if (outcomes[ui].status != CompileStatus::Ok) continue;
    try {
      modules[ui] = parse_ir(outcomes[ui].ir->text);
    } catch (const ParseError& e) {
      parse_errors[ui] = e.what();
    }
  }

  json quarantine = json::array();
  std::vector<const IrModule*> train_modules;
  std::size_t compiled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = corpus.records[i];
    if (modules[i]) {
      ++compiled;
      if (r.split == Split::Train) train_modules.push_back(&*modules[i]);
      continue;
    }
    std::string status = outcomes[i].status == CompileStatus::Ok ? "parse_error" : to_string(outcomes[i].status);
    std::string detail = outcomes[i].status == CompileStatus::Ok ? parse_errors[i] : outcomes[i].stderr_excerpt;
    quarantine.push_back({{"program", r.id}, {"status", status}, {"detail", detail}});
  }
  if (train_modules.empty()) throw std::runtime_error("zero compilable programs in the training split; nothing to build");

  Vocabulary vocab = build_vocab(train_modules, sha256_hex(corpus.serialize()), tc.version);
  FlagFilter filter = o.no_default_deny ? FlagFilter{} : FlagFilter::defaults();
  if (!o.allow_file.empty()) filter.allow = FlagFilter::read_patterns(o.allow_file);
  if (!o.deny_file.empty())
    for (auto& p : FlagFilter::read_patterns(o.deny_file)) filter.deny.push_back(std::move(p));
  FlagCatalog catalog = enumerate_flags(tc, filter);
  if (catalog.size() == 0) throw UsageError("the flag filter admits no optimizer passes");

  write_file_atomic(ws.corpus(), corpus.serialize());
  write_file_atomic(ws.vocab(), vocab.serialize());
  write_file_atomic(ws.flags(), catalog.to_json().dump(2) + "\n");

  auto st = compiler.stats();
  const auto train_n = corpus.in_split(Split::Train).size();
  json info = {{"programs", n},
               {"train", train_n},
               {"test", n - train_n},
               {"compiled", compiled},
               {"quarantined", quarantine},
               {"vocabulary", vocab.size()},
               {"flags", catalog.size()},
               {"toolchain", tc.version},
               {"platform", catalog.platform}};
  write_file_atomic(ws.build_info(), info.dump(2) + "\n");

  if (common.fmt() == Format::Json) {
    json out = info;
    out["cache"] = {{"hits", st.hits}, {"misses", st.misses}};
    fmt::print("{}\n", out.dump(2));
  } else {
    fmt::print("programs\t{}\ttrain\t{}\ttest\t{}\n", n, train_n, n - train_n);
    fmt::print("compiled\t{}\tquarantined\t{}\n", compiled, quarantine.size());
    fmt::print("cache_hits\t{}\tcompiled_now\t{}\n", st.hits, st.misses);
    fmt::print("vocabulary\t{}\n", vocab.size());
    fmt::print("flags\t{}\n", catalog.size());
    for (const auto& q : quarantine)
      fmt::print("quarantine\t{}\t{}\n", q["program"].get<std::string>(), q["status"].get<std::string>());
  }
  report_cache(compiler);
  return quarantine.empty() ? 0 : 1;
}

// --- search -----------------------------------------------------------------

struct SearchOpts {
  std::string workspace;
  GaConfig ga;
  double val_frac = 0.05;
  std::uint64_t val_seed = 0;
  bool val_seed_set = false;
  bool stratified = false;
  bool resume = false;
  std::string mutation = "count";
  long halt_at = -1;
  bool write_reports = false;
  FitnessOpts fitness;
};

json archive_with_flags(const Archive& a, const FlagCatalog& catalog) {
  json j = a.to_json();
  for (auto& m : j["members"]) {
    auto v = FlagVector::from_string(m["genome"].get<std::string>());
    json names = json::array();
    for (auto i : v.enabled()) names.push_back(catalog.flags[i].name);
    m["flags"] = names;
  }
  return j;
}

void print_archive(const Archive& a, Format f) {
  if (f == Format::Json) {
    fmt::print("{}\n", a.to_json().dump(2));
    return;
  }
  fmt::print("rank\tfitness\tgeneration\tflags\n");
  for (std::size_t r = 0; r < a.members().size(); ++r) {
    const auto& m = a.members()[r];
    fmt::print("{}\t{}\t{}\t{}\n", r + 1, format_double(m.fitness), m.generation, m.genome.popcount());
  }
}

int cmd_search(SearchOpts o, const CommonOpts& common) {
  auto s = open_session(o.workspace, common);
  o.ga.mutation_mode = o.mutation == "bernoulli" ? MutationMode::Bernoulli : MutationMode::Count;
  try {
    o.ga.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (s.catalog.size() > 0 && o.ga.k_points >= s.catalog.size()) throw UsageError("--k-points must be below the catalog length");

  std::optional<GaState> resume;
  ValidationSet vs;
  FitnessOpts fopts = o.fitness;
  if (o.resume) {
    resume = load_latest_checkpoint(s.ws.checkpoints());
    if (!resume) throw UsageError("--resume: no checkpoint in " + s.ws.checkpoints().string());
    s.ws.require(s.ws.validation(), "search");
    vs = ValidationSet::from_json(json::parse(read_file(s.ws.validation())));
    if (fs::exists(s.ws.search_config()))
      fopts = FitnessOpts::from_json(json::parse(read_file(s.ws.search_config())).at("fitness"));
  } else {
    for (const auto& e : fs::directory_iterator(s.ws.checkpoints())) fs::remove(e.path());
    vs = sample_validation(s.corpus, o.val_frac, o.val_seed_set ? o.val_seed : o.ga.seed, o.stratified);
    write_file_atomic(s.ws.validation(), vs.to_json().dump(2) + "\n");
    json cfg = {{"ga", o.ga.to_json()}, {"fitness", fopts.to_json()}, {"catalog_digest", s.catalog.digest()}};
    write_file_atomic(s.ws.search_config(), cfg.dump(2) + "\n");
  }

  FitnessEvaluator ev(*s.compiler, s.catalog, s.vocab, fopts.config());
  ev.prepare(members(s.corpus, vs));
  std::size_t proxied = 0;
  for (const auto& p : ev.programs()) proxied += p.source_proxied ? 1 : 0;
  if (proxied > 0) log::info("{} of {} programs compare against the -O0 IR graph", proxied, ev.programs().size());

  const fs::path fitness_dir = s.ws.reports() / "fitness";
  BatchFitness fitness = [&](const std::vector<FlagVector>& pop, std::size_t gen) {
    auto reports = ev.evaluate_batch(pop);
    std::vector<double> out;
    for (const auto& r : reports) {
      out.push_back(r.aggregate);
      if (o.write_reports) {
        auto dir = fitness_dir / fmt::format("gen-{:06}", gen);
        fs::create_directories(dir);
        write_file_atomic(dir / (FlagVector::from_string(r.genome).digest().substr(0, 16) + ".json"), r.to_json().dump(2) + "\n");
      }
    }
    return out;
  };

  GaRunOptions run;
  run.checkpoint_dir = s.ws.checkpoints();
  if (o.halt_at >= 0) run.halt_at = static_cast<std::size_t>(o.halt_at);
  run.on_generation = [&](const TraceRow& r) {
    log::info("generation {}: best {:.6f} mean {:.6f}", r.generation, r.best, r.mean);
  };
  auto result = run_ga(o.ga, s.catalog.size(), fitness, run, std::move(resume));
  report_cache(*s.compiler);
  if (result.halted) {
    fmt::print(stderr, "halted after generation {}; continue with --resume\n", result.state.generation);
    return 0;
  }
  const auto& st = result.state;
  write_file_atomic(s.ws.archive(), archive_with_flags(st.archive, s.catalog).dump(2) + "\n");
  write_file_atomic(s.ws.reports() / "trace.tsv", trace_tsv(st.trace));
  write_file_atomic(s.ws.reports() / "trace.json", trace_json(st.trace));
  print_archive(st.archive, common.fmt());
  return 0;
}

// --- apply ------------------------------------------------------------------

struct ApplyOpts {
  std::string workspace;
  std::string out;
  std::size_t topk = 0;
};

int cmd_apply(const ApplyOpts& o, const CommonOpts& common) {
  auto s = open_session(o.workspace, common);
  s.ws.require(s.ws.archive(), "search");
  auto archive = Archive::from_json(json::parse(read_file(s.ws.archive())));
  if (archive.members().empty()) throw UsageError("the archive is empty");
  const std::size_t k = o.topk == 0 ? archive.members().size() : std::min(o.topk, archive.members().size());
  const fs::path out = o.out.empty() ? s.ws.default_apply_dir() : fs::absolute(o.out);
  fs::create_directories(out);

  auto train = s.corpus.in_split(Split::Train);
  struct Row {
    std::string program, file, digest, status;
    std::size_t rank;
  };
  std::vector<Row> rows(train.size() * k);
#pragma omp parallel for schedule(dynamic)
  for (long x = 0; x < static_cast<long>(rows.size()); ++x) {
    auto ux = static_cast<std::size_t>(x);
    const auto* p = train[ux / k];
    const std::size_t rank = ux % k + 1;
    Row& row = rows[ux];
    row.program = p->id;
    row.rank = rank;
    auto base = s.compiler->compile_baseline(*p);
    if (base.status != CompileStatus::Ok) {
      row.status = "quarantined";
      continue;
    }
    auto opt = s.compiler->optimize(*base.ir, archive.members()[rank - 1].genome, s.catalog);
    row.status = to_string(opt.status);
    if (opt.status != CompileStatus::Ok) continue;
    row.file = sanitize(p->id) + fmt::format("/rank-{}.ll", rank);
    row.digest = opt.ir->digest;
    fs::create_directories((out / row.file).parent_path());
    write_file_atomic(out / row.file, opt.ir->text);
  }

  json manifest = json::array();
  std::string tsv = "program\trank\tfile\tdigest\tstatus\n";
  std::size_t written = 0, failed = 0;
  std::map<std::string, std::set<std::string>> distinct;
  for (const auto& r : rows) {
    manifest.push_back({{"program", r.program}, {"rank", r.rank}, {"file", r.file}, {"digest", r.digest}, {"status", r.status}});
    tsv += fmt::format("{}\t{}\t{}\t{}\t{}\n", r.program, r.rank, r.file, r.digest, r.status);
    if (r.status == "ok") {
      ++written;
      distinct[r.program].insert(r.digest);
    } else {
      ++failed;
      log::warn("{} rank {}: {}", r.program, r.rank, r.status);
    }
  }
  std::size_t multi = 0;
  for (const auto& [_, d] : distinct) multi += d.size() >= 2 ? 1 : 0;
  json doc = {{"format", "irforge-apply"}, {"version", 1}, {"topk", k}, {"entries", manifest}};
  write_file_atomic(out / "manifest.json", doc.dump(2) + "\n");
  write_file_atomic(out / "manifest.tsv", tsv);

  if (common.fmt() == Format::Json) {
    fmt::print("{}\n", json({{"written", written}, {"failed", failed}, {"programs", train.size()}, {"topk", k},
                             {"programs_with_distinct_outputs", multi}, {"out", out.string()}})
                           .dump(2));
  } else {
    fmt::print("written\t{}\tfailed\t{}\tprograms\t{}\ttopk\t{}\n", written, failed, train.size(), k);
    fmt::print("programs_with_distinct_outputs\t{}\n", multi);
    fmt::print("manifest\t{}\n", (out / "manifest.json").string());
  }
  report_cache(*s.compiler);
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalOpts {
  std::string workspace;
  std::vector<std::string> modes{"src"};
  std::string apply_dir;
  std::uint64_t seed = 1;
  std::size_t steps = 200;
  double lr = 0.5;
  std::size_t dim = 2048;
  std::size_t out_dim = 128;
  double margin = 0.5;
};

int cmd_eval(const EvalOpts& o, const CommonOpts& common) {
  auto s = open_session(o.workspace, common);
  std::vector<embed::EvalMode> modes;
  for (const auto& m : o.modes) {
    if (m == "all") {
      modes = {embed::EvalMode::Src, embed::EvalMode::SrcO0, embed::EvalMode::SrcTopk};
      break;
    }
    auto pm = embed::parse_eval_mode(m);
    if (!pm) throw UsageError("unknown --mode " + m);
    if (std::find(modes.begin(), modes.end(), *pm) == modes.end()) modes.push_back(*pm);
  }
  const bool need_o0 = std::count(modes.begin(), modes.end(), embed::EvalMode::SrcO0) > 0;
  const bool need_topk = std::count(modes.begin(), modes.end(), embed::EvalMode::SrcTopk) > 0;

  const fs::path apply_dir = o.apply_dir.empty() ? s.ws.default_apply_dir() : fs::absolute(o.apply_dir);
  std::map<std::string, std::vector<std::string>> topk_files;
  if (need_topk) {
    if (!fs::exists(apply_dir / "manifest.json"))
      throw WorkspaceError((apply_dir / "manifest.json").string() + " is missing; run `irforge apply` first");
    auto doc = json::parse(read_file(apply_dir / "manifest.json"));
    for (const auto& e : doc.at("entries"))
      if (e.at("status") == "ok") topk_files[e.at("program").get<std::string>()].push_back(e.at("file").get<std::string>());
  }

  embed::HashingConfig hc;
  hc.dim = o.dim;
  const auto& recs = s.corpus.records;
  std::vector<embed::EvalItem> items(recs.size());
  std::vector<std::vector<embed::SparseVec>> o0(recs.size()), topk(recs.size());
  std::vector<char> usable(recs.size(), 1);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(recs.size()); ++i) {
    auto ui = static_cast<std::size_t>(i);
    const auto& r = recs[ui];
    auto& it = items[ui];
    it.id = r.id;
    it.label = r.class_label;
    it.test = r.split == Split::Test;
    try {
      it.source = embed::featurize_source(read_file(r.source_path), hc);
    } catch (const std::exception& e) {
      log::warn("{}: {}", r.id, e.what());
      usable[ui] = 0;
      continue;
    }
    if (it.test) continue;
    if (need_o0) {
      auto base = s.compiler->compile_baseline(r);
      if (base.status == CompileStatus::Ok) {
        try {
          o0[ui].push_back(embed::featurize_ir(parse_ir(base.ir->text), hc));
        } catch (const ParseError& e) {
          log::warn("{}: {}", r.id, e.what());
        }
      }
    }
    if (need_topk) {
      auto f = topk_files.find(r.id);
      if (f == topk_files.end()) continue;
      for (const auto& file : f->second) {
        try {
          topk[ui].push_back(embed::featurize_ir(parse_ir(read_file(apply_dir / file)), hc));
        } catch (const std::exception& e) {
          log::warn("{}: {}", file, e.what());
        }
      }
    }
  }
  std::vector<embed::EvalItem> base_items;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (usable[i]) {
      base_items.push_back(items[i]);
      index.push_back(i);
    }

  embed::EvalConfig cfg;
  cfg.seed = o.seed;
  cfg.out = o.out_dim;
  cfg.margin = o.margin;
  cfg.train.steps = o.steps;
  cfg.train.lr = o.lr;

  json rows = json::array();
  std::string tsv = "mode\tmap_at_r\tap\ttest_items\tsource_triplets\tir_triplets\tinitial_loss\tfinal_loss\n";
  for (auto mode : modes) {
    auto run_items = base_items;
    for (std::size_t k = 0; k < run_items.size(); ++k) {
      run_items[k].irs.clear();
      if (mode == embed::EvalMode::SrcO0) run_items[k].irs = o0[index[k]];
      if (mode == embed::EvalMode::SrcTopk) run_items[k].irs = topk[index[k]];
    }
    auto res = embed::run_eval(run_items, mode, cfg);
    for (const auto& c : res.excluded_classes) fmt::print(stderr, "notice: class {} has fewer than 2 test programs; excluded\n", c);
    rows.push_back({{"mode", embed::to_string(mode)},
                    {"map_at_r", res.retrieval.map_at_r},
                    {"ap", res.retrieval.ap},
                    {"test_items", res.test_items},
                    {"source_triplets", res.source_triplets},
                    {"ir_triplets", res.ir_triplets},
                    {"initial_loss", res.initial_loss},
                    {"final_loss", res.final_loss}});
    tsv += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", embed::to_string(mode), format_double(res.retrieval.map_at_r),
                       format_double(res.retrieval.ap), res.test_items, res.source_triplets, res.ir_triplets,
                       format_double(res.initial_loss), format_double(res.final_loss));
  }
  json doc = {{"seed", o.seed}, {"rows", rows}};
  write_file_atomic(s.ws.reports() / "eval.json", doc.dump(2) + "\n");
  write_file_atomic(s.ws.reports() / "eval.tsv", tsv);
  if (common.fmt() == Format::Json) {
    fmt::print("{}\n", doc.dump(2));
  } else {
    fmt::print("{}", tsv);
  }
  return 0;
}

// --- ablate -----------------------------------------------------------------

struct AblateOpts {
  std::string workspace;
  std::size_t rank = 1;
  std::string categories;
};

int cmd_ablate(const AblateOpts& o, const CommonOpts& common) {
  auto s = open_session(o.workspace, common);
  s.ws.require(s.ws.archive(), "search");
  s.ws.require(s.ws.validation(), "search");
  auto archive = Archive::from_json(json::parse(read_file(s.ws.archive())));
  if (o.rank == 0 || o.rank > archive.members().size())
    throw UsageError(fmt::format("--rank {} is out of range (archive holds {})", o.rank, archive.members().size()));
  auto vs = ValidationSet::from_json(json::parse(read_file(s.ws.validation())));
  FitnessOpts fopts;
  if (fs::exists(s.ws.search_config()))
    fopts = FitnessOpts::from_json(json::parse(read_file(s.ws.search_config())).at("fitness"));
  CategoryMap cats = o.categories.empty() ? CategoryMap::defaults() : CategoryMap::parse(read_file(o.categories));

  FitnessEvaluator ev(*s.compiler, s.catalog, s.vocab, fopts.config());
  ev.prepare(members(s.corpus, vs));
  const auto& genome = archive.members()[o.rank - 1].genome;
  if (genome.popcount() == 0) throw UsageError("archive entry has no enabled flags");
  auto report = leave_one_out(genome, s.catalog, [&](const std::vector<FlagVector>& batch) {
    std::vector<double> out;
    for (const auto& r : ev.evaluate_batch(batch)) out.push_back(r.aggregate);
    return out;
  }, cats);

  auto stem = s.ws.reports() / fmt::format("potency-rank-{}", o.rank);
  write_file_atomic(stem.string() + ".tsv", report.to_tsv());
  write_file_atomic(stem.string() + ".json", report.to_json().dump(2) + "\n");
  write_file_atomic(stem.string() + ".txt", report.summary());
  switch (common.fmt()) {
    case Format::Json: fmt::print("{}\n", report.to_json().dump(2)); break;
    case Format::Tsv: fmt::print("{}", report.to_tsv()); break;
    case Format::Text: fmt::print("{}", report.summary()); break;
  }
  report_cache(*s.compiler);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"irforge: genetic search over optimizer flag sets for source-like IR"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "irforge 1.0");

  CommonOpts common;

  BuildOpts bo;
  auto* build = app.add_subcommand("build", "Ingest a corpus, compile -O0 baselines, build the vocabulary and flag catalog");
  build->add_option("--corpus", bo.corpus, "Corpus root directory")->required()->check(CLI::ExistingDirectory);
  build->add_option("--manifest", bo.manifest, "Tab-separated path/label manifest")->check(CLI::ExistingFile);
  build->add_option("--workspace,-w", bo.workspace, "Workspace directory")->required();
  build->add_option("--split", bo.split, "Train/test split unit")->check(CLI::IsMember({"record", "class"}));
  build->add_option("--test-fraction", bo.test_fraction, "Fraction held out for testing")->check(CLI::Range(0.0, 0.95));
  build->add_option("--split-seed", bo.split_seed, "Seed for the train/test split");
  build->add_option("--allow", bo.allow_file, "File of pass-name globs to admit (one per line)")->check(CLI::ExistingFile);
  build->add_option("--deny", bo.deny_file, "File of extra pass-name globs to exclude")->check(CLI::ExistingFile);
  build->add_flag("--no-default-deny", bo.no_default_deny, "Do not apply the built-in deny list");
  add_common(build, common, true);

  SearchOpts so;
  auto* search = app.add_subcommand("search", "Run the genetic search and write the top-K archive");
  search->add_option("--workspace,-w", so.workspace, "Workspace directory")->required();
  search->add_option("--gens", so.ga.generations, "Generations N")->capture_default_str();
  search->add_option("--pop", so.ga.population, "Population size M (even)")->capture_default_str();
  search->add_option("--topk", so.ga.top_k, "Archive size K")->capture_default_str();
  search->add_option("--seed", so.ga.seed, "GA seed")->capture_default_str();
  search->add_option("--val-frac", so.val_frac, "Validation fraction of the training split")->capture_default_str();
  auto* vseed = search->add_option("--val-seed", so.val_seed, "Validation sampling seed (default: --seed)");
  search->add_flag("--stratified", so.stratified, "Stratify the validation draw by class");
  search->add_option("--k-points", so.ga.k_points, "Crossover points")->capture_default_str();
  search->add_option("--crossover-prob", so.ga.crossover_prob, "Crossover probability per pair")->capture_default_str();
  search->add_option("--mutation-rate", so.ga.mutation_rate, "Fraction of bits flipped")->capture_default_str();
  search->add_option("--mutation", so.mutation, "Mutation mode")->check(CLI::IsMember({"count", "bernoulli"}));
  search->add_option("--init-density", so.ga.init_density, "Initial probability of each flag")->capture_default_str();
  search->add_flag("--resume", so.resume, "Continue from the latest checkpoint");
  search->add_flag("--write-reports", so.write_reports, "Write a fitness report per (generation, genome)");
  search->add_option("--halt-at", so.halt_at, "Stop after this generation")->group("");
  add_fitness(search, so.fitness);
  add_common(search, common, true);

  ApplyOpts ao;
  auto* apply = app.add_subcommand("apply", "Compile training programs with the archived sequences");
  apply->add_option("--workspace,-w", ao.workspace, "Workspace directory")->required();
  apply->add_option("--out", ao.out, "Output directory (default: <workspace>/apply)");
  apply->add_option("--topk", ao.topk, "Use the best K archive entries (default: all)");
  add_common(apply, common, true);

  EvalOpts eo;
  auto* eval = app.add_subcommand("eval", "Train the triplet embedding and report retrieval metrics");
  eval->add_option("--workspace,-w", eo.workspace, "Workspace directory")->required();
  eval->add_option("--mode", eo.modes, "src, src+o0, src+topk or all (repeatable)")->capture_default_str();
  eval->add_option("--apply-dir", eo.apply_dir, "Directory written by `apply` (default: <workspace>/apply)");
  eval->add_option("--seed", eo.seed, "Training seed")->capture_default_str();
  eval->add_option("--steps", eo.steps, "Gradient steps")->capture_default_str();
  eval->add_option("--lr", eo.lr, "Learning rate")->capture_default_str();
  eval->add_option("--dim", eo.dim, "Hashed feature dimension")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out-dim", eo.out_dim, "Projection dimension")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--margin", eo.margin, "Triplet margin")->capture_default_str();
  add_common(eval, common, true);

  AblateOpts bl;
  auto* ablate = app.add_subcommand("ablate", "Leave-one-out contribution of each flag in an archived sequence");
  ablate->add_option("--workspace,-w", bl.workspace, "Workspace directory")->required();
  ablate->add_option("--rank", bl.rank, "Archive rank (1 = best)")->capture_default_str();
  ablate->add_option("--categories", bl.categories, "Flag category map (flag<TAB>category)")->check(CLI::ExistingFile);
  add_common(ablate, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  common.apply();
  so.val_seed_set = vseed->count() > 0;

  try {
    if (*build) return cmd_build(bo, common);
    if (*search) return cmd_search(so, common);
    if (*apply) return cmd_apply(ao, common);
    if (*eval) return cmd_eval(eo, common);
    if (*ablate) return cmd_ablate(bl, common);
  } catch (const ToolchainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const WorkspaceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace irforge
