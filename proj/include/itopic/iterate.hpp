#pragma once

// The iterative protocol: cluster, set the outlier group aside, re-cluster the
// rest with a smaller requested topic count, and stop once successive
// clusterings agree under the chosen comparison index.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "itopic/cluster.hpp"
#include "itopic/compare.hpp"
#include "itopic/error.hpp"
#include "itopic/partition.hpp"
#include "itopic/topicrep.hpp"
#include "itopic/vectorize.hpp"

namespace itopic {

enum class StopMetric { VDM, NVI, ARI };
enum class StopReason { Converged, MaxIters, Degenerate };

constexpr std::string_view to_string(StopMetric m) noexcept {
  switch (m) {
    case StopMetric::VDM: return "vdm";
    case StopMetric::NVI: return "nvi";
    case StopMetric::ARI: return "ari";
  }
  return "?";
}

constexpr std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::Degenerate: return "Degenerate";
  }
  return "?";
}

struct RunConfig {
  std::optional<std::size_t> initial_n;  // absent: natural topic count at iteration 0
  std::size_t step_k = 1;
  double epsilon = 0.02;
  StopMetric stop_metric = StopMetric::VDM;
  bool stop_on_delta = false;  // compare successive index values instead of the value itself
  std::size_t max_iters = 20;  // iterations after iteration 0
  ClusterParams cluster_params;
  std::uint64_t seed = 0;

  void validate() const {
    if (step_k < 1) throw Error(ErrorKind::InvalidArgument, "step_k must be at least 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0, 1)");
    if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be at least 1");
    if (initial_n && *initial_n < 1) throw Error(ErrorKind::InvalidArgument, "initial_n must be at least 1");
    cluster_params.validate();
  }
};

struct IterationRecord {
  std::size_t t = 0;
  std::optional<std::size_t> requested_n;
  std::size_t achieved_topics = 0;
  std::vector<std::string> outlier_ids;
  Partition partition;
  std::vector<TopicRep> reps;
  std::optional<ComparisonReport> vs_previous;
  bool merge_warning = false;
};

struct RunResult {
  std::vector<IterationRecord> records;
  Partition final;
  std::vector<TopicRep> final_topics;
  StopReason stop_reason = StopReason::MaxIters;
  std::string detail;
};

/// Raised when the remaining corpus can no longer be clustered meaningfully.
class DegenerateRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StopDecision {
  bool stop = false;
  double value = 0.0;  // the quantity compared against epsilon
};

inline double metric_value(const ComparisonReport& r, StopMetric m) {
  switch (m) {
    case StopMetric::VDM: return r.vdm;
    case StopMetric::NVI: return r.nvi;
    case StopMetric::ARI: return r.ari;
  }
  return 0.0;
}

/// Value mode: vdm <= eps, nvi <= eps, or 1 - ari <= eps.
/// Delta mode: |index(t) - index(t-1)| <= eps; never stops without a previous report.
inline StopDecision should_stop(const ComparisonReport& report, const RunConfig& cfg,
                                const ComparisonReport* previous = nullptr) {
  const double v = metric_value(report, cfg.stop_metric);
  if (cfg.stop_on_delta) {
    if (!previous) return {false, std::nan("")};
    const double delta = std::abs(v - metric_value(*previous, cfg.stop_metric));
    return {delta <= cfg.epsilon, delta};
  }
  const double gap = cfg.stop_metric == StopMetric::ARI ? 1.0 - v : v;
  return {gap <= cfg.epsilon, gap};
}

/// Runs the protocol over a fixed cleaned corpus and its aligned embedding.
class IterativeModel {
 public:
  /// Re-embeds a subset of documents; used only when embeddings are recomputed per iteration.
  using Reembedder = std::function<EmbeddingMatrix(std::span<const Document>)>;

  IterativeModel(std::vector<Document> docs, EmbeddingMatrix emb, RunConfig cfg, Reembedder reembed = {})
      : docs_(std::move(docs)), emb_(std::move(emb)), cfg_(std::move(cfg)), reembed_(std::move(reembed)) {
    cfg_.validate();
    if (docs_.empty()) throw Error(ErrorKind::InvalidArgument, "no documents");
    if (emb_.rows() != docs_.size()) throw Error(ErrorKind::DimensionMismatch, "embedding rows differ from documents");
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (docs_[i].id != emb_.doc_ids[i])
        throw Error(ErrorKind::DimensionMismatch, "embedding row " + std::to_string(i) + " is not document '" +
                                                      docs_[i].id + "'");
      by_id_.emplace(docs_[i].id, i);
    }
    try {
      vocab_ = vectorize::build_vocabulary(docs_, 1, 1.0);
    } catch (const Error&) {
      vocab_ = Vocabulary{};  // every document is empty; representations carry no terms
    }
  }

  const RunConfig& config() const noexcept { return cfg_; }
  const std::vector<Document>& documents() const noexcept { return docs_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

  IterationRecord run_iteration_zero() const {
    std::vector<std::string> universe;
    universe.reserve(docs_.size());
    for (const auto& d : docs_) universe.push_back(d.id);
    return cluster_universe(0, universe, cfg_.initial_n);
  }

  IterationRecord next_iteration(const IterationRecord& prev) const {
    if (prev.achieved_topics == 0) throw DegenerateRun("iteration " + std::to_string(prev.t) + " produced no topics");
    if (prev.requested_n && *prev.requested_n <= 1)
      throw DegenerateRun("requested topic count already at its floor of 1");
    std::unordered_set<std::string_view> outliers(prev.outlier_ids.begin(), prev.outlier_ids.end());
    std::vector<std::string> universe;
    for (const auto& id : prev.partition.ids)
      if (!outliers.contains(id)) universe.push_back(id);
    const auto achieved = static_cast<std::ptrdiff_t>(prev.achieved_topics);
    const auto requested = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, achieved - static_cast<std::ptrdiff_t>(cfg_.step_k)));
    IterationRecord rec = cluster_universe(prev.t + 1, universe, requested);
    rec.vs_previous = cmp::compare(prev.partition, rec.partition);
    return rec;
  }

  /// Groups every original document: each iteration's set-aside outlier group
  /// becomes its own topic, followed by the last iteration's topics and outliers.
  std::pair<Partition, std::vector<TopicRep>> assemble_final(std::span<const IterationRecord> records) const {
    std::unordered_map<std::string_view, int> label;
    std::vector<std::pair<int, std::string>> names;
    int next_label = 0;
    if (!records.empty()) {
      const auto& last = records.back();
      for (std::size_t i = 0; i < last.partition.size(); ++i) label.emplace(last.partition.ids[i], last.partition.labels[i]);
      next_label = static_cast<int>(last.achieved_topics);
      if (!last.outlier_ids.empty()) names.emplace_back(kOutlier, "outlier@" + std::to_string(last.t));
      for (std::size_t r = 0; r + 1 < records.size(); ++r) {
        if (records[r].outlier_ids.empty()) continue;
        const int l = next_label++;
        names.emplace_back(l, "outlier@" + std::to_string(records[r].t));
        for (const auto& id : records[r].outlier_ids) {
          if (!label.emplace(id, l).second)
            throw Error(ErrorKind::InvalidArgument, "document '" + id + "' set aside twice");
        }
      }
    }
    Partition final;
    final.ids.reserve(docs_.size());
    for (const auto& d : docs_) {
      final.ids.push_back(d.id);
      auto it = label.find(d.id);
      if (it == label.end()) {
        if (!records.empty()) throw Error(ErrorKind::MissingId, "document '" + d.id + "' lost by the iteration");
        final.labels.push_back(kOutlier);
      } else {
        final.labels.push_back(it->second);
      }
    }
    if (label.size() != docs_.size() && !records.empty())
      throw Error(ErrorKind::InvalidArgument, "iteration records cover unknown documents");
    auto reps = representations(final);
    for (auto& rep : reps)
      for (const auto& [l, name] : names)
        if (rep.label == l) rep.name = name;
    return {std::move(final), std::move(reps)};
  }

  RunResult run() const {
    RunResult result;
    try {
      result.records.push_back(run_iteration_zero());
      result.stop_reason = StopReason::MaxIters;
      std::optional<ComparisonReport> previous;
      for (;;) {
        if (result.records.back().t >= cfg_.max_iters) {
          result.detail = "reached " + std::to_string(cfg_.max_iters) + " iterations";
          break;
        }
        result.records.push_back(next_iteration(result.records.back()));
        const auto& report = *result.records.back().vs_previous;
        const auto decision = should_stop(report, cfg_, previous ? &*previous : nullptr);
        previous = report;
        if (decision.stop) {
          result.stop_reason = StopReason::Converged;
          char buf[96];
          std::snprintf(buf, sizeof buf, "%s %s %.6g <= epsilon %.6g", std::string(to_string(cfg_.stop_metric)).c_str(),
                        cfg_.stop_on_delta ? "change" : "value", decision.value, cfg_.epsilon);
          result.detail = buf;
          break;
        }
      }
    } catch (const DegenerateRun& e) {
      result.stop_reason = StopReason::Degenerate;
      result.detail = e.what();
    }
    std::tie(result.final, result.final_topics) = assemble_final(result.records);
    return result;
  }

  std::vector<TopicRep> representations(const Partition& part) const {
    if (vocab_.size() == 0) {
      std::vector<TopicRep> reps;
      for (int l = kOutlier; l < static_cast<int>(part.topic_count()); ++l) {
        const auto n = static_cast<std::size_t>(std::count(part.labels.begin(), part.labels.end(), l));
        if (n > 0) reps.push_back(TopicRep{l, n, {}, {}, {}});
      }
      return reps;
    }
    return topics::ctfidf(topics::class_term_counts(part, docs_, vocab_));
  }

 private:
  IterationRecord cluster_universe(std::size_t t, const std::vector<std::string>& universe,
                                   std::optional<std::size_t> requested) const {
    const auto& cp = cfg_.cluster_params;
    const std::size_t need = std::max(2 * cp.min_cluster_size, cp.effective_min_samples() + 1);
    if (universe.size() < need)
      throw DegenerateRun("iteration " + std::to_string(t) + " has " + std::to_string(universe.size()) +
                          " documents; clustering needs at least " + std::to_string(need));
    EmbeddingMatrix emb;
    if (reembed_ && t > 0) {
      std::vector<Document> subset;
      subset.reserve(universe.size());
      for (const auto& id : universe) subset.push_back(docs_[by_id_.at(id)]);
      emb = reembed_(subset);
    } else {
      emb = emb_.select(universe);
    }
    ClusterParams params = cp;
    params.target_n = requested;
    const TermCounter counter = [this](const Partition& p) {
      return topics::class_term_counts(p, docs_, vocab_);
    };
    auto clustered = clustering::cluster(emb, params, vocab_.size() > 0 ? counter : TermCounter{});

    IterationRecord rec;
    rec.t = t;
    rec.requested_n = requested;
    rec.partition = std::move(clustered.partition);
    rec.merge_warning = clustered.warning;
    rec.achieved_topics = rec.partition.topic_count();
    rec.outlier_ids = rec.partition.members(kOutlier);
    rec.reps = representations(rec.partition);
    return rec;
  }

  std::vector<Document> docs_;
  EmbeddingMatrix emb_;
  RunConfig cfg_;
  Reembedder reembed_;
  Vocabulary vocab_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace itopic
