#pragma once

// Class-based TF-IDF topic representations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "itopic/error.hpp"
#include "itopic/io.hpp"
#include "itopic/partition.hpp"
#include "itopic/text.hpp"
#include "itopic/vectorize.hpp"

namespace itopic {

/// Per-class term counts over a fixed vocabulary. Classes are ordered by label, -1 first.
struct TermCountTable {
  const Vocabulary* vocab = nullptr;
  std::vector<int> labels;
  std::vector<std::size_t> sizes;           // documents per class
  std::vector<std::vector<double>> counts;  // [class][term]

  std::size_t classes() const noexcept { return labels.size(); }

  std::ptrdiff_t class_of(int label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : it - labels.begin();
  }

  /// Folds class `from` into class `into` and drops `from`.
  void merge(std::size_t from, std::size_t into) {
    for (std::size_t t = 0; t < counts[into].size(); ++t) counts[into][t] += counts[from][t];
    sizes[into] += sizes[from];
    labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(from));
    sizes.erase(sizes.begin() + static_cast<std::ptrdiff_t>(from));
    counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(from));
  }
};

struct TermWeight {
  std::string term;
  double weight = 0.0;
};

struct TopicRep {
  int label = kOutlier;
  std::size_t size = 0;
  std::string name;                                    // optional display name
  std::vector<TermWeight> terms;                       // weight descending, ties lexicographic
  std::vector<std::pair<std::size_t, double>> vector;  // (vocabulary column, weight), nonzero only
};

namespace topics {

inline TermCountTable class_term_counts(const Partition& part, std::span<const Document> docs, const Vocabulary& vocab) {
  std::unordered_map<std::string_view, const Document*> by_id;
  by_id.reserve(docs.size());
  for (const auto& d : docs) by_id.emplace(d.id, &d);

  TermCountTable table;
  table.vocab = &vocab;
  table.labels = part.labels;
  std::sort(table.labels.begin(), table.labels.end());
  table.labels.erase(std::unique(table.labels.begin(), table.labels.end()), table.labels.end());
  table.sizes.assign(table.labels.size(), 0);
  table.counts.assign(table.labels.size(), std::vector<double>(vocab.size(), 0.0));

  for (std::size_t i = 0; i < part.size(); ++i) {
    auto it = by_id.find(part.ids[i]);
    if (it == by_id.end()) throw Error(ErrorKind::MissingId, part.ids[i]);
    const auto c = static_cast<std::size_t>(table.class_of(part.labels[i]));
    ++table.sizes[c];
    for (auto tok : text::tokens(it->second->clean)) {
      const auto col = vocab.index_of(tok);
      if (col >= 0) table.counts[c][static_cast<std::size_t>(col)] += 1.0;
    }
  }
  return table;
}

/// Dense c-TF-IDF weights W(t,c) = tf(t,c) * ln(1 + A / f(t)), A the mean token count per class.
inline std::vector<std::vector<double>> ctfidf_weights(const TermCountTable& table) {
  if (table.classes() == 0) throw Error(ErrorKind::InvalidArgument, "no classes");
  const std::size_t v = table.counts.front().size();
  std::vector<double> f(v, 0.0);
  double total = 0.0;
  for (const auto& row : table.counts)
    for (std::size_t t = 0; t < v; ++t) {
      f[t] += row[t];
      total += row[t];
    }
  const double avg = total / static_cast<double>(table.classes());
  std::vector<std::vector<double>> w(table.classes(), std::vector<double>(v, 0.0));
  for (std::size_t c = 0; c < table.classes(); ++c)
    for (std::size_t t = 0; t < v; ++t)
      if (table.counts[c][t] > 0.0) w[c][t] = table.counts[c][t] * std::log(1.0 + avg / f[t]);
  return w;
}

inline std::vector<TopicRep> ctfidf(const TermCountTable& table) {
  const auto w = ctfidf_weights(table);
  std::vector<TopicRep> reps;
  reps.reserve(table.classes());
  for (std::size_t c = 0; c < table.classes(); ++c) {
    TopicRep rep;
    rep.label = table.labels[c];
    rep.size = table.sizes[c];
    for (std::size_t t = 0; t < w[c].size(); ++t) {
      if (w[c][t] <= 0.0) continue;
      rep.vector.emplace_back(t, w[c][t]);
      rep.terms.push_back({table.vocab ? table.vocab->terms[t] : std::to_string(t), w[c][t]});
    }
    std::sort(rep.terms.begin(), rep.terms.end(), [](const TermWeight& a, const TermWeight& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.term < b.term;
    });
    reps.push_back(std::move(rep));
  }
  return reps;
}

inline std::vector<TermWeight> top_terms(const TopicRep& rep, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  const auto n = std::min(k, rep.terms.size());
  return {rep.terms.begin(), rep.terms.begin() + static_cast<std::ptrdiff_t>(n)};
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline nlohmann::ordered_json topics_json(std::span<const TopicRep> reps, std::size_t k = 10) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& rep : reps) {
    nlohmann::ordered_json j;
    j["label"] = rep.label;
    if (!rep.name.empty()) j["name"] = rep.name;
    j["size"] = rep.size;
    auto terms = nlohmann::ordered_json::array();
    for (const auto& tw : top_terms(rep, k)) terms.push_back({{"term", tw.term}, {"weight", io::sig6(tw.weight)}});
    j["terms"] = std::move(terms);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace topics
}  // namespace itopic
