#pragma once

// Clustering-comparison indices over a contingency table: Rand, Adjusted Rand,
// normalised Van Dongen, variation of information (nats) and VI normalised by
// the joint entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "itopic/error.hpp"
#include "itopic/partition.hpp"

namespace itopic {

struct ContingencyTable {
  std::int64_t n = 0;
  std::vector<int> row_labels;  // labels of the first partition, ascending
  std::vector<int> col_labels;  // labels of the second partition, ascending
  std::vector<std::int64_t> counts;  // row-major, rows() x cols()
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;

  std::size_t rows() const noexcept { return row_labels.size(); }
  std::size_t cols() const noexcept { return col_labels.size(); }
  std::int64_t at(std::size_t i, std::size_t j) const { return counts[i * cols() + j]; }
};

struct ComparisonReport {
  double rand = 1.0;
  double ari = 1.0;
  double vdm = 0.0;
  double vi = 0.0;  // nats
  double nvi = 0.0;
  std::size_t n_common = 0;
};

struct PairCounts {
  std::int64_t tp = 0;  // together in both
  std::int64_t fp = 0;  // together in the first only
  std::int64_t fn = 0;  // together in the second only
  std::int64_t tn = 0;  // apart in both
};

namespace cmp {

using Wide = __int128;

constexpr std::int64_t choose2(std::int64_t x) noexcept { return x * (x - 1) / 2; }

/// Restricts both partitions to the ids they share, in the first partition's order.
inline std::pair<Partition, Partition> restrict_to_common(const Partition& a, const Partition& b) {
  const auto bmap = b.as_map();
  Partition ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = bmap.find(a.ids[i]);
    if (it == bmap.end()) continue;
    ra.ids.push_back(a.ids[i]);
    ra.labels.push_back(a.labels[i]);
    rb.ids.push_back(a.ids[i]);
    rb.labels.push_back(it->second);
  }
  if (ra.size() < 2)
    throw Error(ErrorKind::InsufficientOverlap,
                "partitions share " + std::to_string(ra.size()) + " ids; at least 2 required");
  return {std::move(ra), std::move(rb)};
}

inline ContingencyTable contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::UniverseMismatch, "label vectors differ in length");
  ContingencyTable ct;
  ct.n = static_cast<std::int64_t>(a.size());
  ct.row_labels.assign(a.begin(), a.end());
  ct.col_labels.assign(b.begin(), b.end());
  for (auto* v : {&ct.row_labels, &ct.col_labels}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  auto index = [](const std::vector<int>& labels, int l) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
  };
  ct.counts.assign(ct.rows() * ct.cols(), 0);
  ct.row_sums.assign(ct.rows(), 0);
  ct.col_sums.assign(ct.cols(), 0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto i = index(ct.row_labels, a[k]);
    const auto j = index(ct.col_labels, b[k]);
    ++ct.counts[i * ct.cols() + j];
    ++ct.row_sums[i];
    ++ct.col_sums[j];
  }
  return ct;
}

/// Table for two partitions over the same universe (same id set, any order).
inline ContingencyTable contingency(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::UniverseMismatch, "universes differ in size");
  const auto bmap = b.as_map();
  std::vector<int> aligned;
  aligned.reserve(a.size());
  for (const auto& id : a.ids) {
    auto it = bmap.find(id);
    if (it == bmap.end()) throw Error(ErrorKind::UniverseMismatch, "id '" + id + "' missing from second partition");
    aligned.push_back(it->second);
  }
  return contingency(a.labels, aligned);
}

struct PairSums {
  Wide cells = 0;  // sum C(n_ij, 2)
  Wide rows = 0;   // sum C(a_i, 2)
  Wide cols = 0;   // sum C(b_j, 2)
  Wide total = 0;  // C(n, 2)
};

inline PairSums pair_sums(const ContingencyTable& ct) {
  PairSums s;
  for (auto c : ct.counts) s.cells += choose2(c);
  for (auto c : ct.row_sums) s.rows += choose2(c);
  for (auto c : ct.col_sums) s.cols += choose2(c);
  s.total = choose2(ct.n);
  return s;
}

inline PairCounts pair_counts(const ContingencyTable& ct) {
  const auto s = pair_sums(ct);
  PairCounts p;
  p.tp = static_cast<std::int64_t>(s.cells);
  p.fp = static_cast<std::int64_t>(s.rows - s.cells);
  p.fn = static_cast<std::int64_t>(s.cols - s.cells);
  p.tn = static_cast<std::int64_t>(s.total - s.rows - s.cols + s.cells);
  return p;
}

inline double rand_from_pairs(const PairCounts& p) {
  const std::int64_t total = p.tp + p.fp + p.fn + p.tn;
  return static_cast<double>(static_cast<long double>(p.tp + p.tn) / static_cast<long double>(total));
}

/// ARI from pair counts: 2(TP*C - R*K) / ((R+K)*C - 2*R*K) with R = TP+FP, K = TP+FN.
/// A zero denominator (both partitions trivial in the same way) scores 1.
inline double ari_from_pairs(const PairCounts& p) {
  const Wide total = Wide{p.tp} + p.fp + p.fn + p.tn;
  const Wide r = Wide{p.tp} + p.fp;
  const Wide k = Wide{p.tp} + p.fn;
  const Wide num = 2 * (Wide{p.tp} * total - r * k);
  const Wide den = (r + k) * total - 2 * r * k;
  if (den == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

inline double rand_index(const ContingencyTable& ct) {
  if (ct.n < 2) throw Error(ErrorKind::InvalidArgument, "rand index needs at least 2 items");
  return rand_from_pairs(pair_counts(ct));
}

inline double adjusted_rand(const ContingencyTable& ct) {
  if (ct.n < 2) throw Error(ErrorKind::InvalidArgument, "adjusted rand needs at least 2 items");
  return ari_from_pairs(pair_counts(ct));
}

inline double van_dongen(const ContingencyTable& ct) {
  if (ct.n < 1) throw Error(ErrorKind::InvalidArgument, "van dongen needs at least 1 item");
  std::int64_t matched = 0;
  for (std::size_t i = 0; i < ct.rows(); ++i) {
    std::int64_t best = 0;
    for (std::size_t j = 0; j < ct.cols(); ++j) best = std::max(best, ct.at(i, j));
    matched += best;
  }
  for (std::size_t j = 0; j < ct.cols(); ++j) {
    std::int64_t best = 0;
    for (std::size_t i = 0; i < ct.rows(); ++i) best = std::max(best, ct.at(i, j));
    matched += best;
  }
  return 1.0 - static_cast<double>(matched) / (2.0 * static_cast<double>(ct.n));
}

struct Entropies {
  double a = 0.0, b = 0.0, joint = 0.0;
};

inline Entropies entropies(const ContingencyTable& ct) {
  const double n = static_cast<double>(ct.n);
  auto h = [n](std::span<const std::int64_t> counts) {
    double s = 0.0;
    for (auto c : counts)
      if (c > 0) {
        const double p = static_cast<double>(c) / n;
        s -= p * std::log(p);
      }
    return s;
  };
  return {h(ct.row_sums), h(ct.col_sums), h(ct.counts)};
}

/// VI = 2 H(A,B) - H(A) - H(B), i.e. H(A) + H(B) - 2 I(A;B).
inline double variation_of_information(const ContingencyTable& ct) {
  if (ct.n < 1) throw Error(ErrorKind::InvalidArgument, "VI needs at least 1 item");
  const auto e = entropies(ct);
  return std::max(0.0, 2.0 * e.joint - e.a - e.b);
}

inline double normalized_vi(const ContingencyTable& ct) {
  if (ct.n < 1) throw Error(ErrorKind::InvalidArgument, "NVI needs at least 1 item");
  const auto e = entropies(ct);
  if (e.joint == 0.0) return 0.0;
  return std::clamp((2.0 * e.joint - e.a - e.b) / e.joint, 0.0, 1.0);
}

inline ComparisonReport compare(const Partition& a, const Partition& b) {
  auto [ra, rb] = restrict_to_common(a, b);
  const auto ct = contingency(ra.labels, rb.labels);
  ComparisonReport r;
  const auto pc = pair_counts(ct);
  r.rand = rand_from_pairs(pc);
  r.ari = ari_from_pairs(pc);
  r.vdm = van_dongen(ct);
  const auto e = entropies(ct);
  r.vi = std::max(0.0, 2.0 * e.joint - e.a - e.b);
  r.nvi = e.joint == 0.0 ? 0.0 : std::clamp(r.vi / e.joint, 0.0, 1.0);
  r.n_common = ra.size();
  return r;
}

/// Exhaustive O(n^2) pair classification; a test oracle for the contingency route.
inline PairCounts oracle_pair_counts(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::UniverseMismatch, "label vectors differ in length");
  if (a.size() > 2000) throw Error(ErrorKind::InvalidArgument, "oracle limited to 2000 items");
  PairCounts p;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++p.tp;
      else if (sa) ++p.fp;
      else if (sb) ++p.fn;
      else ++p.tn;
    }
  }
  return p;
}

}  // namespace cmp
}  // namespace itopic
