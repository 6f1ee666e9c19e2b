// itopic: clean, embed, run, compare, report.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 degenerate or
// non-converged run. Failures print one line "itopic: error: <Kind>: ..." to stderr.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "itopic/itopic.hpp"

namespace {

using namespace itopic;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int fail(int code, std::string_view kind, std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::cerr << "itopic: error: " << kind << ": " << msg << "\n";
  return code;
}

// --- clean -----------------------------------------------------------------

struct CleanArgs {
  std::string input, output, rejects;
  std::string text_col = "text", id_col = "id";
  std::size_t min_chars = 15;
  bool no_english_filter = false;
};

int cmd_clean(const CleanArgs& a) {
  const auto records = io::read_records_csv(a.input, a.id_col, a.text_col);
  const CleanConfig cfg{a.min_chars, !a.no_english_filter};
  std::unordered_set<std::string_view> seen;
  std::vector<Document> kept;
  std::string rejects;
  std::size_t short_count = 0, lang_count = 0;
  for (const auto& rec : records) {
    if (!seen.insert(rec.id).second) throw Error(ErrorKind::DuplicateId, rec.id);
    auto res = text::clean_document(rec, cfg);
    if (auto* doc = std::get_if<Document>(&res)) {
      kept.push_back(std::move(*doc));
      continue;
    }
    const auto& rej = std::get<Rejected>(res);
    (rej.reason == RejectReason::TooShort ? short_count : lang_count)++;
    rejects += ordered_json{{"id", rej.id}, {"reason", std::string(to_string(rej.reason))}}.dump() + "\n";
  }
  io::write_file_atomic(a.output, io::documents_jsonl(kept));
  if (!a.rejects.empty()) io::write_file_atomic(a.rejects, rejects);
  std::cout << ordered_json{{"read", records.size()},
                            {"kept", kept.size()},
                            {"rejected_short", short_count},
                            {"rejected_lang", lang_count}}
                   .dump()
            << "\n";
  return kExitOk;
}

// --- embed -----------------------------------------------------------------

struct EmbedArgs {
  std::string input, output, embeddings;
  std::string method = "tfidf-svd";
  std::size_t dims = 5;
  std::size_t min_df = 2;
  double max_df_ratio = 1.0;
  std::uint64_t seed = 0;
};

int cmd_embed(const EmbedArgs& a) {
  if (a.method == "external" && a.embeddings.empty()) throw UsageError("--method external requires --embeddings");
  const auto docs = io::read_documents_jsonl(a.input);
  if (docs.empty()) throw Error(ErrorKind::ParseError, a.input + ": no documents");
  EmbeddingMatrix emb;
  if (a.method == "external") {
    std::vector<std::string> ids;
    for (const auto& d : docs) ids.push_back(d.id);
    emb = vectorize::load_external_embeddings(a.embeddings, ids);
  } else {
    emb = vectorize::embed_tfidf_svd(docs, {a.dims, a.min_df, a.max_df_ratio, a.seed});
  }
  io::write_file_atomic(a.output, vectorize::embeddings_csv(emb));
  std::cout << ordered_json{{"documents", emb.rows()}, {"dims", emb.dim}, {"method", a.method}}.dump() << "\n";
  return kExitOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string docs, embeddings, outdir;
  std::optional<std::size_t> initial_n, min_samples;
  std::size_t step_k = 1;
  double epsilon = 0.02;
  std::string stop_metric = "vdm";
  bool stop_on_delta = false;
  bool reembed = false;
  std::size_t reembed_min_df = 2;
  std::size_t min_cluster_size = 15;
  std::string selection = "eom";
  std::size_t max_iters = 20;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg;
  cfg.initial_n = a.initial_n;
  cfg.step_k = a.step_k;
  cfg.epsilon = a.epsilon;
  cfg.stop_metric = a.stop_metric == "nvi" ? StopMetric::NVI : a.stop_metric == "ari" ? StopMetric::ARI : StopMetric::VDM;
  cfg.stop_on_delta = a.stop_on_delta;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  cfg.cluster_params.min_cluster_size = a.min_cluster_size;
  cfg.cluster_params.min_samples = a.min_samples;
  cfg.cluster_params.selection = a.selection == "leaf" ? Selection::LEAF : Selection::EOM;
  cfg.cluster_params.seed = a.seed;
  cfg.cluster_params.threads = a.threads;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  auto docs = io::read_documents_jsonl(a.docs);
  if (docs.empty()) throw Error(ErrorKind::ParseError, a.docs + ": no documents");
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id);
  auto emb = vectorize::load_external_embeddings(a.embeddings, ids);

  IterativeModel::Reembedder reembed;
  if (a.reembed) {
    reembed = [dims = emb.dim, min_df = a.reembed_min_df, seed = a.seed](std::span<const Document> subset) {
      return vectorize::embed_tfidf_svd(subset, {dims, min_df, 1.0, seed});
    };
  }
  const IterativeModel model(std::move(docs), std::move(emb), cfg, std::move(reembed));
  const RunResult result = model.run();
  rundir::write(result, cfg, a.outdir);

  std::cout << ordered_json{{"stop_reason", std::string(to_string(result.stop_reason))},
                            {"iterations", result.records.size()},
                            {"final_groups", result.final.group_count()}}
                   .dump()
            << "\n";
  if (result.stop_reason == StopReason::Converged) return kExitOk;
  return fail(kExitDegenerate, to_string(result.stop_reason), result.detail);
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string a, b;
  std::vector<std::string> metrics;
};

int cmd_compare(const CompareArgs& args) {
  static const std::vector<std::string> kAll = {"rand", "ari", "vdm", "vi", "nvi"};
  std::vector<std::string> metrics = args.metrics.empty() ? kAll : args.metrics;
  for (const auto& m : metrics)
    if (std::find(kAll.begin(), kAll.end(), m) == kAll.end()) throw UsageError("unknown metric '" + m + "'");
  const auto pa = parse_partition_csv(io::read_file(args.a));
  const auto pb = parse_partition_csv(io::read_file(args.b));
  const auto r = cmp::compare(pa, pb);
  ordered_json out;
  for (const auto& name : kAll) {
    if (std::find(metrics.begin(), metrics.end(), name) == metrics.end()) continue;
    if (name == "rand") out["rand"] = io::sig6(r.rand);
    if (name == "ari") out["ari"] = io::sig6(r.ari);
    if (name == "vdm") out["vdm"] = io::sig6(r.vdm);
    if (name == "vi") out["vi_nats"] = io::sig6(r.vi);
    if (name == "nvi") out["nvi"] = io::sig6(r.nvi);
  }
  std::cout << out.dump() << "\n";
  return kExitOk;
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
  std::string run;
  std::string format = "md";
};

int cmd_report(const ReportArgs& a) {
  const auto files = rundir::load(a.run);
  if (a.format == "json") std::cout << io::dump_json(rundir::json_report(files));
  else std::cout << rundir::markdown_report(files);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative topic modelling: clean, embed, cluster until successive clusterings agree."};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.set_version_flag("--version", std::string("itopic ") + std::string(itopic::kVersion));
  app.require_subcommand(1);

  CleanArgs clean;
  auto* sc = app.add_subcommand("clean", "Clean raw texts from a CSV into JSON lines");
  sc->add_option("--input", clean.input, "CSV with a header row")->required()->check(CLI::ExistingFile);
  sc->add_option("--text-col", clean.text_col, "text column name")->capture_default_str();
  sc->add_option("--id-col", clean.id_col, "id column name")->capture_default_str();
  sc->add_option("--min-chars", clean.min_chars, "minimum cleaned length in characters")->capture_default_str();
  sc->add_flag("--no-english-filter", clean.no_english_filter, "keep texts that fail the English heuristic");
  sc->add_option("--output", clean.output, "cleaned JSON lines")->required();
  sc->add_option("--rejects", clean.rejects, "JSON lines of rejected ids with reasons");

  EmbedArgs embed;
  auto* se = app.add_subcommand("embed", "Embed cleaned documents");
  se->add_option("--input", embed.input, "cleaned JSON lines")->required()->check(CLI::ExistingFile);
  se->add_option("--method", embed.method)->check(CLI::IsMember({"tfidf-svd", "external"}))->capture_default_str();
  se->add_option("--dims", embed.dims, "reduced dimension")->check(CLI::PositiveNumber)->capture_default_str();
  se->add_option("--min-df", embed.min_df, "minimum document frequency")->capture_default_str();
  se->add_option("--max-df-ratio", embed.max_df_ratio, "maximum document-frequency ratio")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  se->add_option("--embeddings", embed.embeddings, "external embeddings CSV")->check(CLI::ExistingFile);
  se->add_option("--seed", embed.seed)->capture_default_str();
  se->add_option("--output", embed.output, "embeddings CSV")->required();

  RunArgs run;
  auto* sr = app.add_subcommand("run", "Run the iterative protocol");
  sr->add_option("--docs", run.docs, "cleaned JSON lines")->required()->check(CLI::ExistingFile);
  sr->add_option("--embeddings", run.embeddings, "embeddings CSV aligned to --docs")->required()->check(CLI::ExistingFile);
  sr->add_option("--initial-n", run.initial_n, "topic count requested at iteration 0");
  sr->add_option("--step-k", run.step_k)->check(CLI::PositiveNumber)->capture_default_str();
  sr->add_option("--epsilon", run.epsilon)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sr->add_option("--stop-metric", run.stop_metric)->check(CLI::IsMember({"vdm", "nvi", "ari"}))->capture_default_str();
  sr->add_flag("--stop-on-delta", run.stop_on_delta, "stop on the change of the index between comparisons");
  sr->add_flag("--reembed", run.reembed, "recompute TF-IDF+SVD embeddings on each iteration's documents");
  sr->add_option("--reembed-min-df", run.reembed_min_df)->capture_default_str();
  sr->add_option("--min-cluster-size", run.min_cluster_size)->check(CLI::Range(2, 1 << 30))->capture_default_str();
  sr->add_option("--min-samples", run.min_samples)->check(CLI::PositiveNumber);
  sr->add_option("--selection", run.selection)->check(CLI::IsMember({"eom", "leaf"}))->capture_default_str();
  sr->add_option("--max-iters", run.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  sr->add_option("--seed", run.seed)->capture_default_str();
  sr->add_option("--threads", run.threads, "cap on worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sr->add_option("--outdir", run.outdir, "run directory")->required();

  CompareArgs compare;
  auto* sp = app.add_subcommand("compare", "Compare two partition CSVs");
  sp->add_option("--a", compare.a)->required()->check(CLI::ExistingFile);
  sp->add_option("--b", compare.b)->required()->check(CLI::ExistingFile);
  sp->add_option("--metrics", compare.metrics, "subset of rand,ari,vdm,vi,nvi")->delimiter(',');

  ReportArgs report;
  auto* sq = app.add_subcommand("report", "Render a run directory");
  sq->add_option("--run", report.run, "run directory")->required();
  sq->add_option("--format", report.format)->check(CLI::IsMember({"md", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitUsage, "Usage", e.what());
  }

  try {
    if (*sc) return cmd_clean(clean);
    if (*se) return cmd_embed(embed);
    if (*sr) return cmd_run(run);
    if (*sp) return cmd_compare(compare);
    if (*sq) return cmd_report(report);
  } catch (const UsageError& e) {
    return fail(kExitUsage, "Usage", e.what());
  } catch (const itopic::Error& e) {
    const std::string msg = e.what();
    const auto kind = std::string(to_string(e.kind()));
    return fail(e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitData, kind,
                msg.substr(std::min(msg.size(), kind.size() + 2)));
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kExitData, "Io", e.what());
  }
  return kExitUsage;
}
