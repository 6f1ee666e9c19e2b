#pragma once

// Shared generators and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "itopic/itopic.hpp"

namespace itopic::testkit {

/// Portable random source: raw mt19937_64 output only, no library distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

inline std::string doc_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%05zu", i);
  return buf;
}

inline EmbeddingMatrix make_embedding(const std::vector<std::vector<double>>& rows) {
  EmbeddingMatrix e;
  e.dim = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    e.doc_ids.push_back(doc_id(i));
    e.values.insert(e.values.end(), rows[i].begin(), rows[i].end());
  }
  return e;
}

/// Isotropic Gaussian blobs; returns the embedding and the generating blob per row.
inline std::pair<EmbeddingMatrix, std::vector<int>> gaussian_blobs(const std::vector<std::vector<double>>& centers,
                                                                  std::size_t per_blob, double sigma,
                                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t k = 0; k < per_blob; ++k) {
      std::vector<double> p(centers[c].size());
      for (std::size_t d = 0; d < p.size(); ++d) p[d] = centers[c][d] + sigma * rng.normal();
      rows.push_back(std::move(p));
      truth.push_back(static_cast<int>(c));
    }
  }
  return {make_embedding(rows), truth};
}

inline std::vector<Document> make_docs(const std::vector<std::string>& texts) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({doc_id(i), texts[i], texts[i]});
  return docs;
}

inline std::string word(std::size_t i) {
  static constexpr char kLetters[] = "bcdfghjklmnpqrstvwxz";
  std::string w;
  do {
    w.push_back(kLetters[i % 20]);
    i /= 20;
  } while (i > 0);
  w += "o";
  return w;
}

/// Corpus with `topics` planted topics over `vocab` words: each topic owns a
/// disjoint block of words, the remainder is shared background. Documents
/// draw most tokens from their topic's block.
struct PlantedCorpus {
  std::vector<Document> docs;
  std::vector<int> truth;
};

/// Topic sizes decaying geometrically from `largest` to `smallest`, rescaled to sum to `n_docs`.
inline std::vector<std::size_t> skewed_sizes(std::size_t n_docs, std::size_t topics, double largest, double smallest) {
  std::vector<double> w(topics);
  for (std::size_t t = 0; t < topics; ++t)
    w[t] = largest * std::pow(smallest / largest, topics > 1 ? double(t) / double(topics - 1) : 0.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::size_t> sizes(topics);
  std::size_t used = 0;
  for (std::size_t t = 0; t < topics; ++t) used += sizes[t] = static_cast<std::size_t>(w[t] * double(n_docs) / total);
  for (std::size_t t = 0; used < n_docs; t = (t + 1) % topics, ++used) ++sizes[t];
  return sizes;
}

inline PlantedCorpus planted_corpus(const std::vector<std::size_t>& sizes, std::size_t vocab, std::uint64_t seed,
                                    double topic_share = 0.7) {
  Rng rng(seed);
  const std::size_t topics = sizes.size();
  const std::size_t block = vocab * 3 / (4 * topics);
  const std::size_t background = vocab - block * topics;
  std::vector<std::size_t> topic_of;
  for (std::size_t t = 0; t < topics; ++t) topic_of.insert(topic_of.end(), sizes[t], t);
  PlantedCorpus out;
  for (std::size_t i = 0; i < topic_of.size(); ++i) {
    const std::size_t t = topic_of[i];
    const std::size_t len = 12 + rng.below(9);
    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
      std::size_t w;
      if (rng.uniform() < topic_share) {
        // skewed towards the head of the block
        const double u = rng.uniform();
        w = t * block + static_cast<std::size_t>(u * u * static_cast<double>(block));
      } else {
        w = topics * block + rng.below(background);
      }
      if (!text.empty()) text.push_back(' ');
      text += word(w);
    }
    out.docs.push_back({doc_id(i), text, text});
    out.truth.push_back(static_cast<int>(t));
  }
  return out;
}

/// Equal-sized planted topics.
inline PlantedCorpus planted_corpus(std::size_t n_docs, std::size_t topics, std::size_t vocab, std::uint64_t seed,
                                    double topic_share = 0.7) {
  std::vector<std::size_t> sizes(topics, n_docs / topics);
  for (std::size_t t = 0; t < n_docs % topics; ++t) ++sizes[t];
  return planted_corpus(sizes, vocab, seed, topic_share);
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t max_labels, bool allow_outlier = true) {
  std::vector<int> labels(n);
  const std::size_t k = 1 + rng.below(max_labels);
  for (auto& l : labels) {
    l = static_cast<int>(rng.below(k));
    if (allow_outlier && l == 0) l = -1;
  }
  return labels;
}

inline Partition make_partition(const std::vector<int>& labels) {
  Partition p;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p.ids.push_back(doc_id(i));
    p.labels.push_back(labels[i]);
  }
  return p;
}

// --- oracles ----------------------------------------------------------------

/// Entropy-based indices recomputed from raw label vectors with maps.
struct EntropyOracle {
  double vi = 0.0;
  double nvi = 0.0;
};

inline EntropyOracle entropy_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  // I(A;B) = sum p(a,b) ln(p(a,b) / (p(a) p(b)))
  double mi = 0.0, ha = 0.0, hb = 0.0, hab = 0.0;
  for (auto [k, p] : pab) {
    mi += p * std::log(p / (pa[k.first] * pb[k.second]));
    hab -= p * std::log(p);
  }
  for (auto [k, p] : pa) ha -= p * std::log(p);
  for (auto [k, p] : pb) hb -= p * std::log(p);
  EntropyOracle o;
  o.vi = std::max(0.0, ha + hb - 2.0 * mi);
  o.nvi = hab == 0.0 ? 0.0 : o.vi / hab;
  return o;
}

/// Sums weights in ascending order, so equal multisets give bit-equal totals.
inline double ascending_sum(std::vector<double> w) {
  std::sort(w.begin(), w.end());
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

/// Exact minimum spanning tree weight of a complete graph by exhaustive
/// include/exclude search over the edges in ascending weight order. A branch is
/// cut only when its partial weight plus the cheapest edges still available
/// cannot beat the best tree found, which is exact for non-negative weights.
inline double brute_force_mst_weight(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  if (n < 2) return 0.0;
  struct E {
    std::size_t a, b;
    double w;
  };
  std::vector<E> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, w[i][j]});
  std::stable_sort(edges.begin(), edges.end(), [](const E& x, const E& y) { return x.w < y.w; });

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_tree;
  std::vector<std::size_t> chosen;

  auto connected = [&](std::size_t a, std::size_t b) {
    std::vector<std::size_t> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return comp[x] == x ? x : comp[x] = find(comp[x]);
    };
    for (auto idx : chosen) comp[find(edges[idx].a)] = find(edges[idx].b);
    return find(a) == find(b);
  };

  std::function<void(std::size_t, double)> go = [&](std::size_t k, double partial) {
    const std::size_t need = (n - 1) - chosen.size();
    if (need == 0) {
      if (partial < best) {
        best = partial;
        best_tree.clear();
        for (auto idx : chosen) best_tree.push_back(edges[idx].w);
      }
      return;
    }
    if (edges.size() - k < need) return;
    double bound = partial;
    for (std::size_t i = 0; i < need; ++i) bound += edges[k + i].w;
    if (bound >= best) return;
    if (!connected(edges[k].a, edges[k].b)) {
      chosen.push_back(k);
      go(k + 1, partial + edges[k].w);
      chosen.pop_back();
    }
    go(k + 1, partial);
  };
  go(0, 0.0);
  return ascending_sum(best_tree);
}

/// Minimum over every labelled tree on n vertices, enumerated by Pruefer sequence.
/// Feasible for n <= 7.
inline double pruefer_mst_weight(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  if (n < 2) return 0.0;
  if (n == 2) return w[0][1];
  std::vector<std::size_t> seq(n - 2, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<std::size_t> degree(n, 1);
    for (auto v : seq) ++degree[v];
    std::vector<double> tree;
    for (auto v : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      tree.push_back(w[leaf][v]);
      --degree[leaf];
      --degree[v];
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] == 1) (u == n ? u : v) = i;
    tree.push_back(w[u][v]);
    best = std::min(best, ascending_sum(tree));
    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == n) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return best;
}

}  // namespace itopic::testkit
