#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "itopic/vectorize.hpp"
#include "support.hpp"

using namespace itopic;
using namespace itopic::vectorize;
using itopic::testkit::make_docs;

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "itopic_vectorize_test";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

std::vector<std::string> ids_of(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(itopic::testkit::doc_id(i));
  return ids;
}

// Best rank-d Frobenius error from the full dense SVD (Eckart-Young).
double oracle_rank_error(const Eigen::MatrixXd& a, std::size_t d) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  double e = 0.0;
  for (Eigen::Index i = static_cast<Eigen::Index>(d); i < s.size(); ++i) e += s(i) * s(i);
  return std::sqrt(e);
}

}  // namespace

TEST(BuildVocabulary, DocumentFrequencyBounds) {
  const auto docs = make_docs({"a b", "a c", "a d"});
  EXPECT_EQ(build_vocabulary(docs, 2, 1.0).terms, (std::vector<std::string>{"a"}));
  EXPECT_EQ(build_vocabulary(docs, 1, 1.0).terms, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(build_vocabulary(docs, 1, 0.5).terms, (std::vector<std::string>{"b", "c", "d"}));
  EXPECT_EQ(build_vocabulary(docs, 1, 1.0).doc_freq, (std::vector<std::size_t>{3, 1, 1, 1}));
}

TEST(BuildVocabulary, EmptyVocabularyIsAnError) {
  const auto docs = make_docs({"a", "b"});
  try {
    (void)build_vocabulary(docs, 2, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyVocabulary);
  }
}

TEST(TfidfMatrix, Examples) {
  {
    const auto docs = make_docs({"a a b"});
    const auto m = tfidf_matrix(docs, build_vocabulary(docs, 1, 1.0));
    EXPECT_TRUE(m.values.empty());  // idf ln(2/2) = 0 everywhere
  }
  {
    const auto docs = make_docs({"a a", "b"});
    const auto vocab = build_vocabulary(docs, 1, 1.0);
    // before normalisation: 2 * ln(3/2)
    EXPECT_NEAR(2.0 * std::log(1.5), 0.811, 1e-3);
    const auto m = tfidf_matrix(docs, vocab);
    ASSERT_EQ(m.entries().size(), 2u);
    EXPECT_EQ(m.entries()[0].col, 0u);
    EXPECT_DOUBLE_EQ(m.entries()[0].weight, 1.0);
  }
  {
    const auto docs = make_docs({"a b", "", "b c"});
    const auto m = tfidf_matrix(docs, build_vocabulary(docs, 1, 1.0));
    EXPECT_EQ(m.row_ptr[1], m.row_ptr[2]);  // empty doc -> zero row
  }
}

TEST(TfidfMatrix, NonzeroRowsAreUnitLength) {
  const auto corpus = itopic::testkit::planted_corpus(120, 4, 300, 3);
  const auto m = tfidf_matrix(corpus.docs, build_vocabulary(corpus.docs, 2, 0.9));
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    double s = 0.0;
    for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      EXPECT_GE(m.values[k], 0.0);
      s += m.values[k] * m.values[k];
    }
    if (m.row_ptr[r + 1] > m.row_ptr[r]) {
      EXPECT_NEAR(std::sqrt(s), 1.0, 1e-9);
    }
  }
}

TEST(ReduceSvd, RankOneIsExact) {
  Eigen::MatrixXd a(4, 6);
  Eigen::VectorXd v(6);
  v << 1, 0, 2, 0, 0.5, 3;
  Eigen::VectorXd scale(4);
  scale << 1, 2, -0.5, 0.25;
  for (int i = 0; i < 4; ++i) a.row(i) = scale(i) * v.transpose();
  const auto red = reduce_svd(SparseMatrix::from_dense(a), ids_of(4), 1, 42);
  EXPECT_NEAR(red.explained_variance_ratio, 1.0, 1e-12);
  // reconstruction from the single component
  const Eigen::VectorXd unit = v.normalized();
  for (int i = 0; i < 4; ++i) {
    const Eigen::VectorXd recon = red.embedding.row(i)[0] * unit;
    EXPECT_NEAR((recon.transpose() - a.row(i)).norm(), 0.0, 1e-10);
  }
}

TEST(ReduceSvd, FullRankPreservesInnerProducts) {
  itopic::testkit::Rng rng(5);
  Eigen::MatrixXd a(12, 7);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = rng.below(3) == 0 ? rng.uniform() : 0.0;
  const auto red = reduce_svd(SparseMatrix::from_dense(a), ids_of(12), 7, 1);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 7; ++k) dot += red.embedding.row(i)[k] * red.embedding.row(j)[k];
      EXPECT_NEAR(dot, a.row(i).dot(a.row(j)), 1e-8);
    }
}

TEST(ReduceSvd, MatchesDenseOracleOnRandomSparse) {
  itopic::testkit::Rng rng(2024);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(50, 200);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 200; ++j)
      if (rng.below(10) == 0) a(i, j) = rng.uniform();
  const auto red = reduce_svd(SparseMatrix::from_dense(a), ids_of(50), 5, 9);
  // the projection onto the top right singular vectors V: reconstruct A V V^T
  Eigen::MatrixXd p(50, 5);
  for (int i = 0; i < 50; ++i)
    for (int k = 0; k < 5; ++k) p(i, k) = red.embedding.row(i)[k];
  // V = A^T P S^-2 columns; recover V from P via least squares on A: V = pinv(A) P
  Eigen::MatrixXd v = a.completeOrthogonalDecomposition().solve(p);
  for (int k = 0; k < 5; ++k) v.col(k).normalize();
  const double err = (a - a * v * v.transpose()).norm();
  EXPECT_LE(err, oracle_rank_error(a, 5) + 1e-6);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  double kept = 0.0;
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(red.singular_values[static_cast<std::size_t>(k)], svd.singularValues()(k), 1e-6);
    kept += svd.singularValues()(k) * svd.singularValues()(k);
  }
  EXPECT_NEAR(red.explained_variance_ratio, kept / a.squaredNorm(), 1e-6);
  EXPECT_GE(red.power_iterations, kMinPowerIterations);
}

TEST(ReduceSvd, DeterministicGivenSeed) {
  const auto corpus = itopic::testkit::planted_corpus(80, 4, 200, 8);
  const auto opt = TfidfSvdOptions{5, 2, 1.0, 17};
  const auto a = embed_tfidf_svd(corpus.docs, opt);
  const auto b = embed_tfidf_svd(corpus.docs, opt);
  EXPECT_EQ(a.values, b.values);  // bit-identical
  EXPECT_EQ(embeddings_csv(a), embeddings_csv(b));
}

TEST(ReduceSvd, DimensionTooLarge) {
  const auto docs = make_docs({"a b", "a c", "b c"});
  const auto m = tfidf_matrix(docs, build_vocabulary(docs, 1, 1.0));
  try {
    (void)reduce_svd(m, ids_of(3), 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionTooLarge);
  }
}

TEST(ExternalEmbeddings, AlignsToExpectedOrder) {
  const auto path = temp_file("ok.csv", "id,e0,e1\nt2,3,4\nt1,1.5,-2e-3\n");
  const std::vector<std::string> expected = {"t1", "t2"};
  const auto e = load_external_embeddings(path, expected);
  EXPECT_EQ(e.doc_ids, expected);
  EXPECT_EQ(e.dim, 2u);
  EXPECT_DOUBLE_EQ(e.row(0)[1], -2e-3);
  EXPECT_DOUBLE_EQ(e.row(1)[0], 3.0);
}

TEST(ExternalEmbeddings, Errors) {
  auto kind_of = [](const fs::path& p, const std::vector<std::string>& ids) {
    try {
      (void)load_external_embeddings(p, ids);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  const auto ok = temp_file("two.csv", "id,e0\nt1,1\nt2,2\n");
  EXPECT_EQ(kind_of(ok, {"t1", "t3"}), ErrorKind::MissingId);
  EXPECT_EQ(kind_of(ok, {"t1"}), ErrorKind::UnexpectedId);
  EXPECT_EQ(kind_of(temp_file("dup.csv", "id,e0\nt1,1\nt1,2\n"), {"t1"}), ErrorKind::DuplicateId);
  EXPECT_EQ(kind_of(temp_file("dim.csv", "id,e0,e1\nt1,1,2\nt2,2\n"), {"t1", "t2"}), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of(temp_file("num.csv", "id,e0\nt1,abc\n"), {"t1"}), ErrorKind::ParseError);
  EXPECT_EQ(kind_of(temp_file("hdr.csv", "name,x\nt1,1\n"), {"t1"}), ErrorKind::ParseError);
  EXPECT_EQ(kind_of(temp_file("inf.csv", "id,e0\nt1,inf\n"), {"t1"}), ErrorKind::ParseError);
}

TEST(ExternalEmbeddings, SaveLoadRoundTrip) {
  itopic::testkit::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingMatrix e;
    e.dim = 1 + rng.below(6);
    const auto n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      e.doc_ids.push_back("id," + std::to_string(i));  // exercises CSV quoting
      for (std::size_t k = 0; k < e.dim; ++k) e.values.push_back((rng.uniform() - 0.5) * std::pow(10.0, double(rng.below(12)) - 6));
    }
    const auto path = temp_file("rt.csv", embeddings_csv(e));
    const auto back = load_external_embeddings(path, e.doc_ids);
    EXPECT_EQ(back.doc_ids, e.doc_ids);
    ASSERT_EQ(back.values.size(), e.values.size());
    for (std::size_t i = 0; i < e.values.size(); ++i)
      EXPECT_NEAR(back.values[i], e.values[i], std::abs(e.values[i]) * 1e-9);
  }
}
