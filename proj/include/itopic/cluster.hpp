#pragma once

// Density-linkage clustering with an explicit outlier label, after HDBSCAN:
// core distances -> mutual-reachability MST -> single-linkage hierarchy ->
// condensed tree -> EOM or leaf selection. Optionally merges topics down to a
// requested count using c-TF-IDF similarity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "itopic/error.hpp"
#include "itopic/partition.hpp"
#include "itopic/topicrep.hpp"
#include "itopic/vectorize.hpp"

namespace itopic {

enum class Selection { EOM, LEAF };

struct ClusterParams {
  std::size_t min_cluster_size = 15;
  std::optional<std::size_t> min_samples;  // defaults to min_cluster_size
  Selection selection = Selection::EOM;
  std::optional<std::size_t> target_n;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t effective_min_samples() const { return min_samples.value_or(min_cluster_size); }

  void validate() const {
    if (min_cluster_size < 2) throw Error(ErrorKind::InvalidArgument, "min_cluster_size must be at least 2");
    if (effective_min_samples() < 1) throw Error(ErrorKind::InvalidArgument, "min_samples must be at least 1");
    if (target_n && *target_n < 1) throw Error(ErrorKind::InvalidArgument, "target_n must be at least 1");
  }
};

struct MstEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;

  friend bool operator<(const MstEdge& x, const MstEdge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  }
};

struct CondensedNode {
  std::optional<std::size_t> parent;
  double lambda_birth = 0.0;
  double lambda_death = 0.0;
  std::size_t size = 0;  // points present at birth
  std::vector<std::size_t> children;
  std::vector<std::pair<std::size_t, double>> fallen;  // (point, lambda at which it left)
  double stability = 0.0;
};

/// Node 0 is the root; every child has a larger index than its parent.
struct CondensedTree {
  std::size_t n_points = 0;
  std::vector<CondensedNode> nodes;

  bool is_leaf(std::size_t node) const { return nodes[node].children.empty(); }

  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (is_leaf(i)) out.push_back(i);
    return out;
  }

  /// Every point under `node`, including those that fell out of descendants.
  std::vector<std::size_t> points_under(std::size_t node) const {
    std::vector<std::size_t> out, stack{node};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      for (const auto& [p, _] : nodes[cur].fallen) out.push_back(p);
      for (auto c : nodes[cur].children) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct ClusterSelection {
  std::vector<std::size_t> nodes;  // selected condensed-tree nodes, ascending
  std::vector<int> point_labels;   // provisional labels by point index, -1 for noise
  double total_stability = 0.0;
};

struct ReduceResult {
  Partition partition;
  bool warning = false;  // no merge candidate remained before reaching the target
};

/// Builds per-class term counts for a partition; required when a target topic count is set.
using TermCounter = std::function<TermCountTable(const Partition&)>;

namespace clustering {

inline constexpr double kMinDistance = 1e-12;

inline double lambda_of(double distance) { return 1.0 / std::max(distance, kMinDistance); }

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Distance from each point to its `min_samples`-th nearest other point.
inline std::vector<double> core_distances(const EmbeddingMatrix& emb, std::size_t min_samples,
                                          std::size_t threads = 1) {
  const std::size_t n = emb.rows();
  if (min_samples < 1) throw Error(ErrorKind::InvalidArgument, "min_samples must be at least 1");
  if (n <= min_samples)
    throw Error(ErrorKind::TooFewPoints,
                std::to_string(n) + " points cannot supply " + std::to_string(min_samples) + " neighbours each");
  std::vector<double> cores(n);
  detail::parallel_for(n, threads, [&](std::size_t p) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) d.push_back(euclidean(emb.row(p), emb.row(q)));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), d.end());
    cores[p] = d[min_samples - 1];
  });
  return cores;
}

inline double mutual_reachability(const EmbeddingMatrix& emb, std::span<const double> cores, std::size_t p,
                                  std::size_t q) {
  return std::max({cores[p], cores[q], euclidean(emb.row(p), emb.row(q))});
}

/// Prim's algorithm on the complete mutual-reachability graph. Edges compare by
/// (weight, smaller index, larger index), a strict total order, so the tree is unique.
inline std::vector<MstEdge> build_mst(const EmbeddingMatrix& emb, std::span<const double> cores) {
  const std::size_t n = emb.rows();
  if (n < 2) throw Error(ErrorKind::TooFewPoints, "a spanning tree needs at least 2 points");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<bool> in_tree(n, false);
  std::vector<MstEdge> best(n, MstEdge{0, 0, kInf});
  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    for (std::size_t q = 0; q < n; ++q) {
      if (in_tree[q]) continue;
      const MstEdge cand{std::min(current, q), std::max(current, q), mutual_reachability(emb, cores, current, q)};
      if (cand < best[q]) best[q] = cand;
    }
    std::size_t next = n;
    for (std::size_t q = 0; q < n; ++q)
      if (!in_tree[q] && (next == n || best[q] < best[next])) next = q;
    in_tree[next] = true;
    edges.push_back(best[next]);
    current = next;
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

/// Condenses the single-linkage hierarchy implied by `mst`: splits whose smaller
/// side has fewer than `min_cluster_size` points shed those points from the parent.
inline CondensedTree condense_tree(std::span<const MstEdge> mst, std::size_t n_points, std::size_t min_cluster_size) {
  if (mst.size() + 1 != n_points) throw Error(ErrorKind::InvalidArgument, "MST must have n-1 edges");
  std::vector<MstEdge> edges(mst.begin(), mst.end());
  std::sort(edges.begin(), edges.end());

  // Single-linkage dendrogram: leaves 0..n-1, merge k is node n+k.
  const std::size_t total = 2 * n_points - 1;
  std::vector<std::size_t> left(total, 0), right(total, 0), size(total, 1);
  std::vector<double> height(total, 0.0);
  std::vector<std::size_t> uf(total);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::size_t node = n_points + k;
    const auto ra = find(edges[k].a), rb = find(edges[k].b);
    left[node] = ra;
    right[node] = rb;
    size[node] = size[ra] + size[rb];
    height[node] = edges[k].weight;
    uf[ra] = uf[rb] = node;
  }

  CondensedTree tree;
  tree.n_points = n_points;
  tree.nodes.push_back(CondensedNode{std::nullopt, 0.0, 0.0, n_points, {}, {}, 0.0});
  if (n_points == 1) {
    tree.nodes[0].fallen.emplace_back(0, 0.0);
    return tree;
  }

  auto shed = [&](std::size_t sub, std::size_t cluster, double lambda) {
    std::vector<std::size_t> stack{sub};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      if (cur < n_points) {
        tree.nodes[cluster].fallen.emplace_back(cur, lambda);
      } else {
        stack.push_back(left[cur]);
        stack.push_back(right[cur]);
      }
    }
  };

  // (dendrogram node, condensed node) pairs, processed breadth-first
  std::vector<std::pair<std::size_t, std::size_t>> queue{{total - 1, 0}};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [dnode, cnode] = queue[head];
    if (dnode < n_points) {
      tree.nodes[cnode].fallen.emplace_back(dnode, tree.nodes[cnode].lambda_birth);
      continue;
    }
    const double lambda = lambda_of(height[dnode]);
    const auto l = left[dnode], r = right[dnode];
    const bool big_l = size[l] >= min_cluster_size, big_r = size[r] >= min_cluster_size;
    if (big_l && big_r) {
      for (auto child : {l, r}) {
        const std::size_t id = tree.nodes.size();
        tree.nodes.push_back(CondensedNode{cnode, lambda, lambda, size[child], {}, {}, 0.0});
        tree.nodes[cnode].children.push_back(id);
        queue.emplace_back(child, id);
      }
      tree.nodes[cnode].lambda_death = lambda;
    } else if (big_l) {
      shed(r, cnode, lambda);
      queue.emplace_back(l, cnode);
    } else if (big_r) {
      shed(l, cnode, lambda);
      queue.emplace_back(r, cnode);
    } else {
      shed(l, cnode, lambda);
      shed(r, cnode, lambda);
    }
  }

  for (auto& node : tree.nodes) {
    double s = 0.0, death = node.lambda_death;
    for (const auto& [p, lam] : node.fallen) {
      s += lam - node.lambda_birth;
      death = std::max(death, lam);
    }
    for (auto c : node.children) s += static_cast<double>(tree.nodes[c].size) * (tree.nodes[c].lambda_birth - node.lambda_birth);
    node.stability = s;
    node.lambda_death = death;
  }
  return tree;
}

/// Picks clusters from the condensed tree. EOM keeps a node when its stability
/// exceeds the best total its descendants can reach; LEAF keeps every leaf.
/// Points outside all selected nodes are noise.
inline ClusterSelection select_nodes(const CondensedTree& tree, Selection selection) {
  if (tree.nodes.empty()) throw Error(ErrorKind::InvalidArgument, "empty condensed tree");
  ClusterSelection sel;
  if (selection == Selection::LEAF) {
    sel.nodes = tree.leaves();
  } else {
    std::vector<double> best(tree.nodes.size(), 0.0);
    for (std::size_t i = tree.nodes.size(); i-- > 0;) {
      const auto& node = tree.nodes[i];
      double below = 0.0;
      for (auto c : node.children) below += best[c];
      best[i] = (node.children.empty() || node.stability > below) ? node.stability : below;
    }
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      const auto& node = tree.nodes[cur];
      double below = 0.0;
      for (auto c : node.children) below += best[c];
      if (node.children.empty() || node.stability > below) {
        sel.nodes.push_back(cur);
      } else {
        for (auto c : node.children) stack.push_back(c);
      }
    }
    std::sort(sel.nodes.begin(), sel.nodes.end());
  }
  sel.point_labels.assign(tree.n_points, kOutlier);
  for (std::size_t k = 0; k < sel.nodes.size(); ++k) {
    sel.total_stability += tree.nodes[sel.nodes[k]].stability;
    for (auto p : tree.points_under(sel.nodes[k])) sel.point_labels[p] = static_cast<int>(k);
  }
  return sel;
}

/// Selection as a partition over `ids` (point i is ids[i]), labels ordered by size.
inline Partition select_clusters(const CondensedTree& tree, Selection selection, std::span<const std::string> ids) {
  if (ids.size() != tree.n_points) throw Error(ErrorKind::DimensionMismatch, "one id per point required");
  const auto sel = select_nodes(tree, selection);
  Partition p;
  p.ids.assign(ids.begin(), ids.end());
  p.labels = sel.point_labels;
  return relabel_by_size(std::move(p));
}

/// Merges the smallest topic into its most similar topic (cosine of c-TF-IDF
/// vectors) until at most `target_n` topics remain. The outlier group never merges.
/// `counts` must be the class term counts of `part`.
inline ReduceResult reduce_to_target(const Partition& part, TermCountTable counts, std::size_t target_n) {
  ReduceResult out{part, false};
  auto topics = [&] {
    std::size_t t = 0;
    for (int l : counts.labels) t += l != kOutlier;
    return t;
  };
  if (topics() <= target_n) return out;
  if (topics() == 1) {
    out.warning = true;
    return out;
  }
  std::vector<int>& labels = out.partition.labels;
  while (topics() > target_n) {
    std::size_t smallest = counts.classes();
    for (std::size_t c = 0; c < counts.classes(); ++c) {
      if (counts.labels[c] == kOutlier) continue;
      if (smallest == counts.classes() || counts.sizes[c] < counts.sizes[smallest] ||
          (counts.sizes[c] == counts.sizes[smallest] && counts.labels[c] > counts.labels[smallest]))
        smallest = c;
    }
    const auto w = topics::ctfidf_weights(counts);
    std::size_t target = counts.classes();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < counts.classes(); ++c) {
      if (c == smallest || counts.labels[c] == kOutlier) continue;
      const double sim = topics::cosine(w[smallest], w[c]);
      if (sim > best || (sim == best && counts.labels[c] < counts.labels[target])) {
        best = sim;
        target = c;
      }
    }
    const int from = counts.labels[smallest], into = counts.labels[target];
    for (int& l : labels)
      if (l == from) l = into;
    counts.merge(smallest, target);
  }
  out.partition = relabel_by_size(std::move(out.partition));
  return out;
}

/// Full pipeline. Rows are canonically ordered by document id first, so the
/// result does not depend on input row order.
inline ReduceResult cluster(const EmbeddingMatrix& emb, const ClusterParams& params, const TermCounter& counter = {}) {
  params.validate();
  const std::size_t n = emb.rows();
  const std::size_t ms = params.effective_min_samples();
  if (n < std::max(2 * params.min_cluster_size, ms + 1))
    throw Error(ErrorKind::TooFewPoints, std::to_string(n) + " points; need at least " +
                                             std::to_string(std::max(2 * params.min_cluster_size, ms + 1)));
  std::vector<std::string> sorted_ids = emb.doc_ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  const EmbeddingMatrix canon = emb.select(sorted_ids);

  const auto cores = core_distances(canon, ms, params.threads);
  const auto mst = build_mst(canon, cores);
  const auto tree = condense_tree(mst, n, params.min_cluster_size);
  Partition sorted = select_clusters(tree, params.selection, sorted_ids);

  // back to caller order
  const auto label = sorted.as_map();
  Partition part;
  part.ids = emb.doc_ids;
  part.labels.reserve(n);
  for (const auto& id : part.ids) part.labels.push_back(label.at(id));

  if (!params.target_n) return {std::move(part), false};
  if (!counter) throw Error(ErrorKind::InvalidArgument, "a target topic count requires term counts");
  return reduce_to_target(part, counter(part), *params.target_n);
}

}  // namespace clustering
}  // namespace itopic
