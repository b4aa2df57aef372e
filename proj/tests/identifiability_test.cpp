#include <gtest/gtest.h>

#include "mixrecon/identifiability.hpp"
#include "oracles.hpp"

using namespace mixrecon;

namespace {

ReadSamplingMatrix build(const std::vector<std::string>& seqs, int L) {
  return build_matrix(SequenceDatabase::from_sequences(seqs), L, 1);
}

std::vector<bool> flags_of(const std::vector<std::string>& seqs, int L, IdentifiabilityOptions opt = {}) {
  return analyze_identifiability(build(seqs, L), opt, true).partial_flags;
}

}  // namespace

TEST(Identifiability, SingleSpecies) {
  const auto r = is_identifiable(build({"ACGTTGA"}, 3));
  EXPECT_TRUE(r.identifiable);
  EXPECT_EQ(r.rank, 1U);
}

TEST(Identifiability, FiveSpeciesAtLengthOne) {
  const auto A = build({"A", "C", "G", "T", "AC"}, 1);
  const auto r = is_identifiable(A);
  EXPECT_FALSE(r.identifiable);
  EXPECT_LE(r.rank, 5U);
}

TEST(Identifiability, AnyFivePlusAtLengthOneIsNot) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto seqs = oracle::random_sequences(5 + seed, 5, 30, seed);
    const auto rep = analyze_identifiability(build(seqs, 1));
    EXPECT_FALSE(rep.identifiable);
    EXPECT_LT(rep.fraction_partial(), 1.0);
  }
}

TEST(Identifiability, DisjointWindowSets) {
  const auto r = is_identifiable(build({"ACGT", "TGCA"}, 2));
  EXPECT_TRUE(r.identifiable);
  EXPECT_EQ(r.rank, 2U);
}

TEST(Identifiability, SharedWindowMultiset) {
  const auto rep = analyze_identifiability(build({"AACA", "ACAA", "GGGG"}, 2));
  EXPECT_EQ(rep.partial_flags, (std::vector<bool>{false, false, true}));
  EXPECT_EQ(rep.null_space_dim, 1U);
  EXPECT_FALSE(rep.identifiable);
}

TEST(Identifiability, FullyIdentifiableAllFlagsTrue) {
  const auto rep = analyze_identifiability(build({"ACGT", "TGCA", "GGGA"}, 2));
  ASSERT_TRUE(rep.identifiable);
  for (bool f : rep.partial_flags) EXPECT_TRUE(f);
}

TEST(Identifiability, SubstringFreeAtMaxLength) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto db = SequenceDatabase::from_sequences(oracle::random_sequences(12, 4, 9, seed));
    if (find_contained_sequence(db)) continue;
    const auto rep = analyze_identifiability(build_matrix(db, static_cast<int>(db.n_max()), 1));
    EXPECT_TRUE(rep.identifiable) << "seed " << seed;
  }
}

TEST(Identifiability, AgreesWithDenseOracle) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    mixrecon::Rng rng(seed);
    const int L = 1 + static_cast<int>(rng.below(4));
    const auto seqs = oracle::random_sequences(2 + rng.below(30), 3, 12, seed * 3);
    const auto dense = oracle::dense_identifiability(oracle::dense_matrix(seqs, L));
    const auto rep = analyze_identifiability(build(seqs, L));
    EXPECT_EQ(rep.rank, dense.rank) << "seed " << seed;
    EXPECT_EQ(rep.partial_flags, dense.flags) << "seed " << seed;
    EXPECT_EQ(rep.identifiable, std::all_of(rep.partial_flags.begin(), rep.partial_flags.end(), [](bool f) { return f; }));
  }
}

TEST(Identifiability, ComponentsMatchWholeMatrix) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto seqs = oracle::random_sequences(10 + seed % 40, 4, 10, seed);
    const auto A = build(seqs, 3);
    IdentifiabilityOptions whole;
    whole.decompose = false;
    const auto a = analyze_identifiability(A);
    const auto b = analyze_identifiability(A, whole);
    EXPECT_EQ(a.rank, b.rank);
    EXPECT_EQ(a.partial_flags, b.partial_flags);
    EXPECT_EQ(b.method, RankMethod::dense_svd);
  }
}

TEST(Identifiability, PermutationInvariance) {
  auto seqs = oracle::random_sequences(25, 4, 9, 17);
  const auto base = flags_of(seqs, 2);
  std::vector<std::size_t> perm(seqs.size());
  std::iota(perm.begin(), perm.end(), 0);
  mixrecon::Rng rng(5);
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<std::string> permuted;
  for (auto p : perm) permuted.push_back(seqs[p]);
  const auto flags = flags_of(permuted, 2);
  for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(flags[k], base[perm[k]]);
}

TEST(Identifiability, DisjointDatabasesGiveTwoComponents) {
  const auto A = build({"AAAAC", "AAACA", "GGGGT", "GGGTT"}, 3);
  const auto groups = decompose_components(A);
  ASSERT_EQ(groups.size(), 2U);
  EXPECT_EQ(groups[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(groups[1], (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(decompose_components(build({"AAAAC", "AAACA", "AACAA"}, 2)).size(), 1U);
}

TEST(Identifiability, SketchAgreesOnLargeComponents) {
  const auto seqs = oracle::random_sequences(60, 20, 40, 33);
  for (int L : {3, 6}) {
    const auto A = build(seqs, L);
    IdentifiabilityOptions sketch;
    sketch.dense_cap = 10;
    const auto exact = analyze_identifiability(A);
    const auto approx = analyze_identifiability(A, sketch);
    EXPECT_EQ(exact.rank, approx.rank);
    EXPECT_EQ(exact.partial_flags, approx.partial_flags);
  }
}

TEST(Identifiability, CapacityWithoutDecomposition) {
  const auto A = build(oracle::random_sequences(30, 10, 20, 2), 4);
  IdentifiabilityOptions opt;
  opt.decompose = false;
  opt.dense_cap = 10;
  EXPECT_THROW(analyze_identifiability(A, opt), CapacityError);
}

TEST(Scan, CriticalLengthOfTwoSpecies) {
  const auto scan = critical_read_length_scan(SequenceDatabase::from_sequences({"AACA", "ACAA"}), 1, 4);
  ASSERT_TRUE(scan.critical_read_length.has_value());
  EXPECT_EQ(*scan.critical_read_length, 3);
  EXPECT_FALSE(scan.points[1].identifiable);
  EXPECT_TRUE(scan.points[2].identifiable);
}

TEST(Scan, MonotoneOnSubstringFreeDatabases) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto db = SequenceDatabase::from_sequences(oracle::random_sequences(30, 8, 16, seed));
    const auto scan = critical_read_length_scan(db, 1, 8);
    if (!scan.substring_free) continue;
    EXPECT_TRUE(scan.violations.empty());
    for (std::size_t i = 1; i < scan.points.size(); ++i) {
      EXPECT_GE(scan.points[i].fraction_partial, scan.points[i - 1].fraction_partial);
      // Each point equals a fresh computation at that L.
      const auto rep = analyze_identifiability(build_matrix(db, scan.points[i].L, 1));
      EXPECT_EQ(rep.fraction_partial(), scan.points[i].fraction_partial);
    }
  }
}

TEST(Scan, ContainedSequenceWarns) {
  const auto db = SequenceDatabase::from_sequences({"ACG", "TTACGT", "GGGG"});
  const auto pair = find_contained_sequence(db);
  ASSERT_TRUE(pair.has_value());
  EXPECT_EQ(*pair, std::make_pair(1, 2));
  const auto scan = critical_read_length_scan(db, 1, 3);
  EXPECT_FALSE(scan.substring_free);
  EXPECT_FALSE(scan.warnings.empty());
  EXPECT_THROW(critical_read_length_scan(db, 3, 2), InvalidArgument);
}
