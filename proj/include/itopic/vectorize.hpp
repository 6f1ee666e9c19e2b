#pragma once

// Document embeddings: TF-IDF weighting followed by a seeded randomized
// truncated SVD, or externally produced vectors loaded from CSV.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "itopic/error.hpp"
#include "itopic/io.hpp"
#include "itopic/text.hpp"

namespace itopic {

struct Vocabulary {
  std::vector<std::string> terms;        // sorted
  std::vector<std::size_t> doc_freq;     // parallel to terms

  std::size_t size() const noexcept { return terms.size(); }

  /// Column index of `term`, or -1 when absent.
  std::ptrdiff_t index_of(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term) return -1;
    return it - terms.begin();
  }
};

/// Compressed sparse rows; columns within a row are strictly increasing.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  struct Entry {
    std::size_t row, col;
    double weight;
  };

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(values.size());
    for (std::size_t r = 0; r < n_rows; ++r)
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out.push_back({r, col_idx[k], values[k]});
    return out;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (const auto& e : entries()) m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.weight;
    return m;
  }

  static SparseMatrix from_dense(const Eigen::MatrixXd& m) {
    SparseMatrix s;
    s.n_rows = static_cast<std::size_t>(m.rows());
    s.n_cols = static_cast<std::size_t>(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) {
          s.col_idx.push_back(static_cast<std::size_t>(c));
          s.values.push_back(m(r, c));
        }
      }
      s.row_ptr.push_back(s.values.size());
    }
    return s;
  }
};

/// Row-major dense embedding, one row per document.
struct EmbeddingMatrix {
  std::vector<std::string> doc_ids;
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const noexcept { return doc_ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }

  /// Rows for `ids`, in that order.
  EmbeddingMatrix select(std::span<const std::string> ids) const {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < doc_ids.size(); ++i) index.emplace(doc_ids[i], i);
    EmbeddingMatrix out;
    out.dim = dim;
    out.doc_ids.assign(ids.begin(), ids.end());
    out.values.reserve(ids.size() * dim);
    for (const auto& id : ids) {
      auto it = index.find(id);
      if (it == index.end()) throw Error(ErrorKind::MissingId, id);
      auto r = row(it->second);
      out.values.insert(out.values.end(), r.begin(), r.end());
    }
    return out;
  }
};

struct Reduction {
  EmbeddingMatrix embedding;
  std::vector<double> singular_values;
  double explained_variance_ratio = 0.0;
  std::size_t power_iterations = 0;
};

namespace vectorize {

inline std::vector<std::string_view> doc_terms(const Document& d) { return text::tokens(d.clean); }

inline Vocabulary build_vocabulary(std::span<const Document> docs, std::size_t min_df, double max_df_ratio) {
  if (docs.empty()) throw Error(ErrorKind::InvalidArgument, "no documents");
  if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "max_df_ratio must lie in (0, 1]");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& d : docs) {
    auto toks = doc_terms(d);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto t : toks) {
      auto it = df.find(t);
      if (it == df.end()) df.emplace(std::string(t), 1);
      else ++it->second;
    }
  }
  const double max_df = max_df_ratio * static_cast<double>(docs.size());
  Vocabulary v;
  for (auto& [term, count] : df) {
    if (count >= min_df && static_cast<double>(count) <= max_df) {
      v.terms.push_back(term);
      v.doc_freq.push_back(count);
    }
  }
  if (v.terms.empty()) throw Error(ErrorKind::EmptyVocabulary, "no term satisfies the document-frequency bounds");
  return v;
}

/// Raw counts times smoothed idf ln((1+n)/(1+df)); every nonzero row is then L2-normalised.
inline SparseMatrix tfidf_matrix(std::span<const Document> docs, const Vocabulary& vocab) {
  SparseMatrix m;
  m.n_rows = docs.size();
  m.n_cols = vocab.size();
  const double n = static_cast<double>(docs.size());
  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t)
    idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.doc_freq[t])));

  std::map<std::size_t, double> row;
  for (const auto& d : docs) {
    row.clear();
    for (auto tok : doc_terms(d)) {
      const auto col = vocab.index_of(tok);
      if (col >= 0) row[static_cast<std::size_t>(col)] += 1.0;
    }
    double norm2 = 0.0;
    for (auto& [col, w] : row) {
      w *= idf[col];
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [col, w] : row) {
        if (w == 0.0) continue;
        m.col_idx.push_back(col);
        m.values.push_back(w * inv);
      }
    }
    m.row_ptr.push_back(m.values.size());
  }
  return m;
}

namespace detail {

// A * X for CSR A and dense X.
inline Eigen::MatrixXd multiply(const SparseMatrix& a, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_rows), x.cols());
  for (std::size_t r = 0; r < a.n_rows; ++r)
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      y.row(static_cast<Eigen::Index>(r)) += a.values[k] * x.row(static_cast<Eigen::Index>(a.col_idx[k]));
  return y;
}

// A^T * X
inline Eigen::MatrixXd multiply_transposed(const SparseMatrix& a, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_cols), x.cols());
  for (std::size_t r = 0; r < a.n_rows; ++r)
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      y.row(static_cast<Eigen::Index>(a.col_idx[k])) += a.values[k] * x.row(static_cast<Eigen::Index>(r));
  return y;
}

inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Standard normals from a 64-bit Mersenne twister via Box-Muller; avoids the
// implementation-defined std::normal_distribution so streams match across toolchains.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925;
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace detail

inline constexpr std::size_t kMinPowerIterations = 4;
inline constexpr std::size_t kMaxPowerIterations = 300;
inline constexpr std::size_t kOversampling = 10;

/// Projects the rows of `m` onto its top-`d` right singular vectors.
///
/// The range of `m` is sampled with a seeded Gaussian test matrix and refined
/// by subspace (power) iteration: at least kMinPowerIterations rounds, then
/// until the leading singular values stop moving. Each singular vector's
/// largest-magnitude entry is made positive so the output is sign-stable.
inline Reduction reduce_svd(const SparseMatrix& m, std::vector<std::string> doc_ids, std::size_t d,
                            std::uint64_t seed) {
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be at least 1");
  const std::size_t cap = std::min(m.n_rows, m.n_cols);
  if (d > cap)
    throw Error(ErrorKind::DimensionTooLarge,
                "requested " + std::to_string(d) + " dimensions but the matrix supports at most " +
                    std::to_string(cap));
  if (doc_ids.size() != m.n_rows) throw Error(ErrorKind::DimensionMismatch, "one id per matrix row required");

  const auto l = static_cast<Eigen::Index>(std::min(d + kOversampling, cap));
  const auto cols = static_cast<Eigen::Index>(m.n_cols);

  Eigen::MatrixXd omega(cols, l);
  detail::GaussianStream gauss(seed);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < cols; ++i) omega(i, j) = gauss.next();

  Eigen::MatrixXd q = detail::orthonormal_basis(detail::multiply(m, omega));
  Eigen::VectorXd sigma_prev;
  Eigen::MatrixXd bt;  // (Q^T A)^T, cols x l
  std::size_t iters = 0;
  for (;;) {
    bt = detail::multiply_transposed(m, q);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(bt);
    const Eigen::VectorXd sigma = svd.singularValues().head(static_cast<Eigen::Index>(d));
    if (iters >= kMinPowerIterations) {
      const double scale = std::max(sigma(0), 1e-300);
      if ((sigma - sigma_prev).cwiseAbs().maxCoeff() <= 1e-13 * scale || iters >= kMaxPowerIterations) break;
    }
    sigma_prev = sigma;
    q = detail::orthonormal_basis(detail::multiply(m, detail::orthonormal_basis(bt)));
    ++iters;
  }

  // B = Q^T A = U S V^T  <=>  B^T = V S U^T, so the right singular vectors of A are the left ones of B^T.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bt, Eigen::ComputeThinU);
  Eigen::MatrixXd v = svd.matrixU().leftCols(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.rows(); ++i)
      if (std::abs(v(i, j)) > std::abs(v(arg, j))) arg = i;
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
  const Eigen::MatrixXd proj = detail::multiply(m, v);

  Reduction out;
  out.power_iterations = iters;
  out.embedding.doc_ids = std::move(doc_ids);
  out.embedding.dim = d;
  out.embedding.values.resize(m.n_rows * d);
  for (std::size_t r = 0; r < m.n_rows; ++r)
    for (std::size_t c = 0; c < d; ++c)
      out.embedding.values[r * d + c] = proj(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  double total = 0.0;
  for (double w : m.values) total += w * w;
  double kept = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
    out.singular_values.push_back(svd.singularValues()(i));
    kept += svd.singularValues()(i) * svd.singularValues()(i);
  }
  out.explained_variance_ratio = total > 0.0 ? kept / total : 0.0;
  return out;
}

struct TfidfSvdOptions {
  std::size_t dims = 5;
  std::size_t min_df = 2;
  double max_df_ratio = 1.0;
  std::uint64_t seed = 0;
};

inline EmbeddingMatrix embed_tfidf_svd(std::span<const Document> docs, const TfidfSvdOptions& opt) {
  const auto vocab = build_vocabulary(docs, opt.min_df, opt.max_df_ratio);
  const auto m = tfidf_matrix(docs, vocab);
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.id);
  return reduce_svd(m, std::move(ids), opt.dims, opt.seed).embedding;
}

inline std::string embeddings_csv(const EmbeddingMatrix& e) {
  std::string out = "id";
  for (std::size_t c = 0; c < e.dim; ++c) out += ",e" + std::to_string(c);
  out += '\n';
  for (std::size_t r = 0; r < e.rows(); ++r) {
    out += io::csv_escape(e.doc_ids[r]);
    for (double v : e.row(r)) {
      out += ',';
      out += io::format_exact(v);
    }
    out += '\n';
  }
  return out;
}

inline EmbeddingMatrix parse_embeddings_csv(std::string_view data) {
  const auto rows = io::parse_csv(data);
  if (rows.empty()) throw Error(ErrorKind::ParseError, "line 1: missing header");
  const auto& header = rows.front().fields;
  if (header.size() < 2 || header[0] != "id")
    throw Error(ErrorKind::ParseError, "line 1: header must be id,e0,...");
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c] != "e" + std::to_string(c - 1))
      throw Error(ErrorKind::ParseError, "line 1: unexpected column '" + header[c] + "'");
  EmbeddingMatrix e;
  e.dim = header.size() - 1;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size())
      throw Error(ErrorKind::DimensionMismatch, "line " + std::to_string(row.line) + ": expected " +
                                                    std::to_string(e.dim) + " values, got " +
                                                    std::to_string(row.fields.size() - 1));
    if (row.fields[0].empty()) throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": empty id");
    if (!seen.insert(row.fields[0]).second) throw Error(ErrorKind::DuplicateId, row.fields[0]);
    e.doc_ids.push_back(row.fields[0]);
    for (std::size_t c = 1; c < row.fields.size(); ++c) {
      const auto& f = row.fields[c];
      double v = 0.0;
      const char* first = f.data();
      if (!f.empty() && f[0] == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v) || f.empty())
        throw Error(ErrorKind::ParseError, "line " + std::to_string(row.line) + ": bad number '" + f + "'");
      e.values.push_back(v);
    }
  }
  return e;
}

/// Loads an embeddings CSV and aligns it to `expected_ids`; the id sets must match exactly.
inline EmbeddingMatrix load_external_embeddings(const io::fs::path& path, std::span<const std::string> expected_ids) {
  const EmbeddingMatrix file = parse_embeddings_csv(io::read_file(path));
  std::unordered_set<std::string_view> expected;
  for (const auto& id : expected_ids) {
    if (!expected.insert(id).second) throw Error(ErrorKind::DuplicateId, id);
  }
  std::unordered_set<std::string_view> present(file.doc_ids.begin(), file.doc_ids.end());
  for (const auto& id : expected_ids)
    if (!present.contains(id)) throw Error(ErrorKind::MissingId, id);
  for (const auto& id : file.doc_ids)
    if (!expected.contains(id)) throw Error(ErrorKind::UnexpectedId, id);
  return file.select(expected_ids);
}

}  // namespace vectorize
}  // namespace itopic
