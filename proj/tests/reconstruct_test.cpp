#include <gtest/gtest.h>

#include <set>

#include "mixrecon/harness.hpp"
#include "mixrecon/reconstruct.hpp"
#include "oracles.hpp"

using namespace mixrecon;

namespace {

std::vector<std::size_t> iota_ids(std::size_t n) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

}  // namespace

TEST(Partition, EvenSplit) {
  const auto ids = iota_ids(10);
  const auto blocks = partition_species(ids, 5, 1, 1, 0);
  ASSERT_EQ(blocks.size(), 2U);
  std::set<std::size_t> all;
  for (const auto& b : blocks) {
    EXPECT_EQ(b.size(), 5U);
    all.insert(b.begin(), b.end());
  }
  EXPECT_EQ(all.size(), 10U);
}

TEST(Partition, Remainder) {
  const auto blocks = partition_species(iota_ids(11), 5, 1, 1, 0);
  ASSERT_EQ(blocks.size(), 3U);
  EXPECT_EQ(blocks[0].size(), 5U);
  EXPECT_EQ(blocks[1].size(), 5U);
  EXPECT_EQ(blocks[2].size(), 1U);
}

TEST(Partition, Deterministic) {
  const auto ids = iota_ids(100);
  EXPECT_EQ(partition_species(ids, 7, 3, 2, 1), partition_species(ids, 7, 3, 2, 1));
  EXPECT_NE(partition_species(ids, 7, 3, 2, 1), partition_species(ids, 7, 3, 2, 2));
  EXPECT_THROW(partition_species(ids, 1, 3, 2, 1), InvalidArgument);
}

TEST(Partition, EveryIdOncePerRound) {
  mixrecon::Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto n = 1 + rng.below(300);
    const auto B = 2 + rng.below(40);
    const auto blocks = partition_species(iota_ids(n), B, rng.next(), 1, 0);
    std::vector<int> seen(n, 0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (k + 1 < blocks.size()) EXPECT_EQ(blocks[k].size(), B);
      for (auto j : blocks[k]) ++seen[j];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST(Schedule, DefaultRule) {
  DncParams p;
  EXPECT_EQ(partitions_for(p, 1, 1000, 1000), 1U);
  EXPECT_EQ(partitions_for(p, 2, 500, 1000), 1U);
  EXPECT_EQ(partitions_for(p, 2, 300, 1000), 10U);
  EXPECT_EQ(partitions_for(p, 3, 40, 1000), 20U);
  p.schedule = {2, 5};
  EXPECT_EQ(partitions_for(p, 1, 1000, 1000), 2U);
  EXPECT_EQ(partitions_for(p, 4, 10, 1000), 5U);
}

TEST(DncParams, Validation) {
  DncParams p;
  EXPECT_NO_THROW(p.validate());
  p.block_size = 1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.tau = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.final_cap = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.schedule = {1, 0};
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Dnc, SingleBlockMatchesThresholdedDirectSolve) {
  const auto db = generate_random_db(30, 60, 4);
  const auto A = build_matrix(db, 12, 1);
  const auto truth = sample_power_law_mixture(db, 5, 1.0, 9).full();
  const auto y = empirical_frequencies(simulate_reads(A, truth, 20000, 3), A).y;
  DncParams p;
  p.block_size = 50;
  p.final_cap = 50;
  const auto rep = divide_and_conquer(A, y, p);
  ASSERT_EQ(rep.iterations.size(), 1U);
  EXPECT_EQ(rep.iterations[0].blocks_solved, 1U);

  const auto direct = nnls_solve(A.entries(), y);
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < A.cols(); ++j) {
    if (direct.x[static_cast<Eigen::Index>(j)] >= p.tau) kept.push_back(j);
  }
  ASSERT_TRUE(analyze_identifiability(A).identifiable);
  const auto resolve = nnls_solve(select_columns(A.entries(), kept), y);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.cols()));
  for (std::size_t k = 0; k < kept.size(); ++k) expect[static_cast<Eigen::Index>(kept[k])] = resolve.x[static_cast<Eigen::Index>(k)];
  expect /= expect.sum();
  EXPECT_LE((rep.x_hat.values - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Dnc, PlantedHundredSpecies) {
  const auto db = generate_random_db(100, 80, 7);
  const auto A = build_matrix(db, 20, 1);
  const auto mixture = sample_power_law_mixture(db, 5, 1.0, 12);
  const auto truth = mixture.full();
  const auto y = empirical_frequencies(simulate_reads(A, truth, 100000, 5), A).y;
  DncParams p;
  p.block_size = 20;
  p.final_cap = 20;
  p.seed = 3;
  const auto rep = divide_and_conquer(A, y, p);
  auto planted = mixture.support;
  std::sort(planted.begin(), planted.end());
  EXPECT_EQ(rep.support, planted);
  const auto species = unweight_from_dna(rep.x_hat, A.col_lengths());
  EXPECT_LE((species.values - truth.values).cwiseAbs().maxCoeff(), 1e-2);

  const auto direct = nnls_solve(A.entries(), y);
  std::vector<int> direct_support;
  for (Eigen::Index j = 0; j < direct.x.size(); ++j) {
    if (direct.x[j] >= p.tau) direct_support.push_back(static_cast<int>(j) + 1);
  }
  EXPECT_EQ(direct_support, planted);
}

TEST(Dnc, UnrelatedSpeciesNeverMarked) {
  // Species 3 shares no 6-mer with the others, so no read of the mixture hits it.
  const auto db = SequenceDatabase::from_sequences(
      {"ACGTACGGATCCATGA", "TTGACCGATGCAAGTC", "GGGGGGGGGGGGGGGG", "CATCATGACTGACGTA"});
  const auto A = build_matrix(db, 6, 1);
  FrequencyVector x{Eigen::Vector4d(0.6, 0.4, 0.0, 0.0), FrequencyKind::species, true};
  const auto y = empirical_frequencies(simulate_reads(A, x, 5000, 1), A).y;
  DncParams p;
  p.block_size = 2;
  p.final_cap = 1;
  p.schedule = {3};
  const auto rep = divide_and_conquer(A, y, p);
  EXPECT_EQ(std::count(rep.final_candidates.begin(), rep.final_candidates.end(), 3), 0);
  EXPECT_EQ(rep.x_hat.values[2], 0.0);
}

TEST(Dnc, SurvivorsNeverGrow) {
  const auto db = generate_random_db(300, 50, 8);
  const auto A = build_matrix(db, 15, 2);
  const auto y = empirical_frequencies(simulate_reads(A, sample_power_law_mixture(db, 10, 1.0, 2).full(), 50000, 4), A).y;
  DncParams p;
  p.block_size = 30;
  p.final_cap = 15;
  const auto rep = divide_and_conquer(A, y, p);
  for (const auto& it : rep.iterations) EXPECT_LE(it.survivors_out, it.survivors_in);
  for (std::size_t k = 1; k < rep.iterations.size(); ++k) {
    EXPECT_EQ(rep.iterations[k].survivors_in, rep.iterations[k - 1].survivors_out);
  }
  EXPECT_LE(rep.final_candidates.size(), p.final_cap);
  EXPECT_NEAR(rep.x_hat.values.sum(), 1.0, 1e-12);
  EXPECT_EQ(rep.x_hat.kind, FrequencyKind::dna_weighted);
}

TEST(Dnc, AmbiguousSpeciesRetained) {
  // Species 1 and 2 share the same 2-mer multiset; they stay ambiguous in any block.
  const auto db = SequenceDatabase::from_sequences({"AACA", "ACAA", "GGGGT", "TTTTC"});
  const auto A = build_matrix(db, 2, 1);
  FrequencyVector x{Eigen::Vector4d(0.0, 0.0, 0.5, 0.5), FrequencyKind::species, true};
  const auto y = empirical_frequencies(simulate_reads(A, x, 1000, 2), A).y;
  DncParams p;
  p.block_size = 4;
  p.final_cap = 3;
  p.schedule = {1};
  p.max_iterations = 1;
  const auto rep = divide_and_conquer(A, y, p);
  ASSERT_FALSE(rep.iterations.empty());
  EXPECT_EQ(rep.iterations[0].marked_ambiguous, 2U);
  p.ambiguity = AmbiguityRule::literal_orthogonal;
  const auto lit = divide_and_conquer(A, y, p);
  EXPECT_EQ(lit.iterations[0].survivors_out, 2U);
}

TEST(Dnc, DeterministicAcrossWorkers) {
  const auto db = generate_random_db(200, 60, 10);
  const auto A = build_matrix(db, 14, 1);
  const auto y = empirical_frequencies(simulate_reads(A, sample_power_law_mixture(db, 8, 1.0, 1).full(), 30000, 2), A).y;
  DncParams p;
  p.block_size = 25;
  p.final_cap = 20;
  p.seed = 99;
  p.workers = 1;
  const auto a = divide_and_conquer(A, y, p);
  p.workers = 4;
  const auto b = divide_and_conquer(A, y, p);
  EXPECT_EQ(a.x_hat.values, b.x_hat.values);
  EXPECT_EQ(a.support, b.support);
}

TEST(Dnc, EmptyYReturnsDiagnostic) {
  const auto A = build_matrix(SequenceDatabase::from_sequences({"ACGTAC", "GGATCC"}), 3, 1);
  SparseVec y(static_cast<Eigen::Index>(A.rows()));
  const auto rep = divide_and_conquer(A, y, {});
  EXPECT_TRUE(rep.support.empty());
  EXPECT_FALSE(rep.diagnostics.empty());
}

TEST(Dnc, DimensionMismatch) {
  const auto A = build_matrix(SequenceDatabase::from_sequences({"ACGTAC", "GGATCC"}), 3, 1);
  SparseVec y(static_cast<Eigen::Index>(A.rows() + 1));
  EXPECT_THROW(divide_and_conquer(A, y, {}), InvalidArgument);
}
