#include <gtest/gtest.h>

#include <map>

#include "mixrecon/read_matrix.hpp"
#include "oracles.hpp"

using namespace mixrecon;

namespace {

// Rows of A as {kmer -> column values}.
std::map<std::string, std::vector<double>> as_map(const ReadSamplingMatrix& A) {
  std::map<std::string, std::vector<double>> out;
  const Eigen::MatrixXd D(A.entries());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    std::vector<double> row(A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) row[j] = D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out[A.row_kmer(i)] = row;
  }
  return out;
}

ReadSamplingMatrix build(const std::vector<std::string>& seqs, int L, std::size_t workers = 1) {
  return build_matrix(SequenceDatabase::from_sequences(seqs), L, workers);
}

void expect_matches_oracle(const std::vector<std::string>& seqs, int L) {
  const auto A = build(seqs, L);
  const Eigen::MatrixXd dense = oracle::dense_matrix(seqs, L);
  std::size_t nonzero_rows = 0;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    if (dense.row(i).cwiseAbs().sum() == 0.0) continue;
    ++nonzero_rows;
    const auto row = A.row_of(oracle::kmer_of(static_cast<std::uint64_t>(i), L));
    ASSERT_TRUE(row.has_value());
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      ASSERT_EQ(A.entries().coeff(static_cast<Eigen::Index>(*row), j), dense(i, j));
    }
  }
  EXPECT_EQ(nonzero_rows, A.rows());
}

}  // namespace

TEST(ReadMatrix, WindowsOfACGT) {
  const auto A = build({"ACGT"}, 2);
  const auto m = as_map(A);
  ASSERT_EQ(m.size(), 3U);
  for (const char* k : {"AC", "CG", "GT"}) EXPECT_DOUBLE_EQ(m.at(k)[0], 1.0 / 3.0);
}

TEST(ReadMatrix, RepeatedKmer) {
  const auto m = as_map(build({"AAAA"}, 2));
  ASSERT_EQ(m.size(), 1U);
  EXPECT_EQ(m.at("AA")[0], 1.0);
}

TEST(ReadMatrix, ShortSequenceTail) {
  const auto m = as_map(build({"AC"}, 3));
  ASSERT_EQ(m.size(), 4U);
  for (const char* k : {"ACA", "ACC", "ACG", "ACT"}) EXPECT_EQ(m.at(k)[0], 0.25);
}

TEST(ReadMatrix, TailCap) {
  EXPECT_NO_THROW(build({"A"}, 1 + kMaxTailExponent));
  EXPECT_THROW(build({"A"}, 2 + kMaxTailExponent), CapacityError);
}

TEST(ReadMatrix, RowsSortedLexicographically) {
  const auto A = build(oracle::random_sequences(10, 20, 40, 3), 6);
  for (std::size_t i = 1; i < A.rows(); ++i) EXPECT_LT(A.row_kmer(i - 1), A.row_kmer(i));
  for (std::size_t i = 0; i < A.rows(); ++i) EXPECT_EQ(lex_decode(A.row_code(i)), A.row_kmer(i));
}

TEST(ReadMatrix, MatchesDenseOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    mixrecon::Rng rng(seed);
    const int L = 2 + static_cast<int>(rng.below(5));
    const auto seqs = oracle::random_sequences(1 + rng.below(8), 3, 14, seed * 7);
    expect_matches_oracle(seqs, L);
  }
}

TEST(ReadMatrix, OraclesAgree) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto seqs = oracle::random_sequences(5, 2, 10, seed);
    for (int L : {2, 3, 5}) EXPECT_EQ(oracle::dense_matrix(seqs, L), oracle::dense_matrix_by_comparison(seqs, L));
  }
}

TEST(ReadMatrix, LongReadsUsePackedKeys) {
  // L spanning several 64-bit words: compare against a std::string window count.
  const auto seqs = oracle::random_sequences(6, 100, 140, 11);
  for (int L : {32, 33, 50, 64, 65, 100}) {
    const auto A = build(seqs, L);
    std::map<std::string, std::vector<double>> expect;
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      const auto& s = seqs[j];
      ASSERT_GE(s.size(), static_cast<std::size_t>(L));
      for (std::size_t k = 0; k + static_cast<std::size_t>(L) <= s.size(); ++k) {
        auto& row = expect[s.substr(k, static_cast<std::size_t>(L))];
        row.resize(seqs.size(), 0.0);
        row[j] += 1.0;
      }
    }
    for (auto& entry : expect) {
      for (std::size_t j = 0; j < seqs.size(); ++j) {
        entry.second[j] /= static_cast<double>(seqs[j].size() - static_cast<std::size_t>(L) + 1);
      }
    }
    ASSERT_EQ(expect.size(), A.rows());
    const auto got = as_map(A);
    for (const auto& [kmer, row] : expect) {
      ASSERT_TRUE(got.count(kmer)) << "L=" << L;
      for (std::size_t j = 0; j < seqs.size(); ++j) EXPECT_NEAR(got.at(kmer)[j], row[j], 1e-15);
    }
    for (std::size_t i = 0; i < A.rows(); ++i) {
      EXPECT_EQ(unpack_kmer(A.row_key(i), L), A.row_kmer(i));
      EXPECT_EQ(A.row_of(A.row_kmer(i)), i);
    }
  }
}

TEST(ReadMatrix, ColumnsSumToOne) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto seqs = oracle::random_sequences(15, 32, 60, seed);
    for (int L : {1, 4, 8, 12, 40}) {
      const auto A = build(seqs, L);
      const auto sums = A.column_sums();
      for (Eigen::Index j = 0; j < sums.size(); ++j) EXPECT_NEAR(sums[j], 1.0, 1e-12);
    }
  }
}

TEST(ReadMatrix, RowCountBound) {
  const auto seqs = oracle::random_sequences(20, 30, 80, 9);
  for (int L : {5, 10, 25}) {
    const auto A = build(seqs, L);
    std::size_t bound = 0;
    for (const auto& s : seqs) bound += s.size() - static_cast<std::size_t>(L) + 1;
    EXPECT_LE(A.rows(), bound);
  }
}

TEST(ReadMatrix, DeterministicAcrossWorkers) {
  const auto seqs = oracle::random_sequences(50, 20, 200, 4);
  const auto one = serialize_matrix(build(seqs, 9, 1));
  EXPECT_EQ(one, serialize_matrix(build(seqs, 9, 4)));
  EXPECT_EQ(one, serialize_matrix(build(seqs, 9, 7)));
}

TEST(ReadMatrix, SerializationRoundTrip) {
  const auto A = build(oracle::random_sequences(12, 31, 70, 8), 40);
  const auto bytes = serialize_matrix(A);
  const auto B = deserialize_matrix(bytes);
  EXPECT_EQ(serialize_matrix(B), bytes);
  EXPECT_EQ(B.rows(), A.rows());
  EXPECT_EQ(B.col_lengths(), A.col_lengths());

  auto corrupt = bytes;
  corrupt.back() ^= 0x01;
  EXPECT_THROW(deserialize_matrix(corrupt), FormatError);
  EXPECT_THROW(deserialize_matrix(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(deserialize_matrix("NOTAMATRIX"), FormatError);
}

TEST(ReadMatrix, BuildRejections) {
  EXPECT_THROW(build_matrix(SequenceDatabase{}, 3), InvalidArgument);
  EXPECT_THROW(build({"ACGT"}, 0), InvalidArgument);
  EXPECT_THROW(build({"ACGT"}, kMaxMatrixReadLength + 1), InvalidArgument);
}

TEST(Reweight, EqualLengthsIdentity) {
  const std::vector<std::size_t> n{50, 50, 50};
  FrequencyVector x{Eigen::Vector3d(0.2, 0.3, 0.5), FrequencyKind::species, true};
  EXPECT_TRUE(reweight_to_dna(x, n).values.isApprox(x.values, 1e-15));
  FrequencyVector xp{x.values, FrequencyKind::dna_weighted, true};
  EXPECT_TRUE(unweight_from_dna(xp, n).values.isApprox(x.values, 1e-15));
}

TEST(Reweight, HandExamples) {
  const std::vector<std::size_t> n{100, 200};
  const auto xp = reweight_to_dna({Eigen::Vector2d(0.5, 0.5), FrequencyKind::species, true}, n);
  EXPECT_NEAR(xp.values[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(xp.values[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(xp.kind, FrequencyKind::dna_weighted);
  const auto x = unweight_from_dna({Eigen::Vector2d(1.0 / 3.0, 2.0 / 3.0), FrequencyKind::dna_weighted, true}, n);
  EXPECT_NEAR(x.values[0], 0.5, 1e-15);
  EXPECT_NEAR(x.values[1], 0.5, 1e-15);
  const auto e1 = reweight_to_dna({Eigen::Vector2d(1.0, 0.0), FrequencyKind::species, true}, n);
  EXPECT_EQ(e1.values, Eigen::Vector2d(1.0, 0.0));
}

TEST(Reweight, RoundTripRandom) {
  mixrecon::Rng rng(77);
  for (int t = 0; t < 100; ++t) {
    const int N = 2 + static_cast<int>(rng.below(20));
    Eigen::VectorXd v(N);
    std::vector<std::size_t> n(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
      v[j] = rng.uniform();
      n[static_cast<std::size_t>(j)] = 1 + rng.below(2000);
    }
    FrequencyVector x{v / v.sum(), FrequencyKind::species, true};
    const auto back = unweight_from_dna(reweight_to_dna(x, n), n);
    EXPECT_LE((back.values - x.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reweight, KindIsChecked) {
  const std::vector<std::size_t> n{1, 2};
  FrequencyVector xp{Eigen::Vector2d(0.5, 0.5), FrequencyKind::dna_weighted, true};
  EXPECT_THROW(reweight_to_dna(xp, n), InvalidArgument);
  EXPECT_THROW(unweight_from_dna({xp.values, FrequencyKind::species, true}, n), InvalidArgument);
  EXPECT_THROW(reweight_to_dna({Eigen::Vector3d(0.2, 0.3, 0.5), FrequencyKind::species, true}, n), InvalidArgument);
}

TEST(ExpectedReads, BasisVectorGivesColumn) {
  const auto A = build({"ACGTTGCA", "GGGACT"}, 3);
  FrequencyVector e{Eigen::Vector2d(0.0, 1.0), FrequencyKind::dna_weighted, true};
  const Eigen::VectorXd y(expected_read_distribution(A, e));
  const Eigen::VectorXd col(A.entries().col(1));
  EXPECT_EQ(y, col);
}

TEST(ExpectedReads, DisjointWindows) {
  const auto A = build({"ACGT", "TGCA"}, 2);
  const Eigen::VectorXd y(expected_read_distribution(A, {Eigen::Vector2d(0.5, 0.5), FrequencyKind::dna_weighted, true}));
  ASSERT_EQ(y.size(), 6);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(y[i], 1.0 / 6.0, 1e-15);
}

TEST(ExpectedReads, SumsToOne) {
  const auto A = build(oracle::random_sequences(30, 5, 50, 21), 7);
  mixrecon::Rng rng(3);
  Eigen::VectorXd v(30);
  for (int j = 0; j < 30; ++j) v[j] = rng.uniform();
  const Eigen::VectorXd y(expected_read_distribution(A, {v / v.sum(), FrequencyKind::dna_weighted, true}));
  EXPECT_NEAR(y.sum(), 1.0, 1e-12);
}
