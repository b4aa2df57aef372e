#include <gtest/gtest.h>

#include <set>

#include "mixrecon/harness.hpp"

using namespace mixrecon;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.random = {150, 80, 3};
  cfg.L = 30;
  cfg.k = 5;
  cfg.R_grid = {2000, 20000};
  cfg.trials = 3;
  cfg.dnc.block_size = 40;
  cfg.dnc.final_cap = 30;
  cfg.scan_L_lo = 1;
  cfg.scan_L_hi = 5;
  cfg.workers = 2;
  return cfg;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(RandomDb, FourSingleBases) {
  const auto db = generate_random_db(4, 1, 17);
  std::set<std::string> seqs;
  for (const auto& r : db.records()) seqs.insert(r.sequence);
  EXPECT_EQ(seqs, (std::set<std::string>{"A", "C", "G", "T"}));
  EXPECT_THROW(generate_random_db(5, 1, 17), InvalidArgument);
  EXPECT_THROW(generate_random_db(0, 10, 17), InvalidArgument);
}

TEST(RandomDb, UniformBases) {
  const auto db = generate_random_db(1000, 1000, 5);
  std::array<double, 4> counts{};
  for (const auto& r : db.records()) {
    for (char c : r.sequence) counts[static_cast<std::size_t>(nucleotide_digit(c))] += 1.0;
  }
  for (double c : counts) EXPECT_NEAR(c / 1e6, 0.25, 0.01);
}

TEST(RandomDb, Deterministic) {
  EXPECT_EQ(generate_random_db(50, 30, 9), generate_random_db(50, 30, 9));
  EXPECT_NE(to_fasta(generate_random_db(50, 30, 9)), to_fasta(generate_random_db(50, 30, 10)));
}

TEST(Config, Validation) {
  auto cfg = small_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.R_grid = {100, 100};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.R_grid = {};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = small_config();
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Config, JsonRoundTripAndHash) {
  const auto cfg = small_config();
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.hash(), cfg.hash());
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(other.hash(), cfg.hash());
  other = cfg;
  other.workers = 7;
  other.output_dir = "/elsewhere";
  EXPECT_EQ(other.hash(), cfg.hash());
}

TEST(ErrorVsReads, ShapeAndDeterminism) {
  const auto cfg = small_config();
  const auto a = run_error_vs_reads(cfg);
  EXPECT_EQ(a.summary.size(), cfg.R_grid.size());
  EXPECT_EQ(a.trials.size(), cfg.R_grid.size() * cfg.trials);
  EXPECT_EQ(a.failed_trials(), 0U);
  EXPECT_EQ(count_lines(a.trials_csv()), 1 + cfg.R_grid.size() * cfg.trials);
  EXPECT_EQ(count_lines(a.summary_csv()), 1 + cfg.R_grid.size());
  for (std::size_t i = 1; i < a.trials.size(); ++i) {
    const auto& p = a.trials[i - 1];
    const auto& q = a.trials[i];
    EXPECT_TRUE(p.R < q.R || (p.R == q.R && p.trial < q.trial));
  }
  auto serial = cfg;
  serial.workers = 1;
  const auto b = run_error_vs_reads(serial);
  EXPECT_EQ(a.trials_csv(), b.trials_csv());
  EXPECT_EQ(a.summary_csv(), b.summary_csv());
  EXPECT_EQ(a.summary_json().dump(), b.summary_json().dump());
}

TEST(ErrorVsReads, RowsReproducibleInIsolation) {
  auto cfg = small_config();
  const auto full = run_error_vs_reads(cfg);
  const auto& row = full.trials[cfg.trials + 1];
  const auto db = experiment_database(cfg);
  const auto A = build_matrix(db, cfg.L, 1);
  const auto mixture = sample_power_law_mixture(db, cfg.k, cfg.alpha, derive_seed(row.trial_seed, 1));
  const auto reads = simulate_reads(A, mixture.full(), row.R, derive_seed(row.trial_seed, 2), 1);
  auto params = cfg.dnc;
  params.seed = derive_seed(row.trial_seed, 3);
  const auto rep = divide_and_conquer(A, empirical_frequencies(reads, A).y, params);
  const auto ev = evaluate(mixture.full(), unweight_from_dna(rep.x_hat, A.col_lengths()), A, row.R, cfg.delta);
  EXPECT_EQ(ev.mahalanobis_error, row.mahalanobis_error);
  EXPECT_EQ(ev.l2_error, row.l2_error);
}

TEST(ErrorVsReads, MostlyWithinMahalanobisBound) {
  const auto result = run_error_vs_reads(small_config());
  std::size_t within = 0;
  for (const auto& t : result.trials) within += t.mahalanobis_error <= t.mahalanobis_bound;
  EXPECT_GE(within * 4, result.trials.size() * 3);
}

TEST(ErrorVsReads, FailedTrialsRecorded) {
  auto cfg = small_config();
  cfg.k = 500;  // more species than the database holds
  const auto result = run_error_vs_reads(cfg);
  EXPECT_EQ(result.trials.size(), cfg.R_grid.size() * cfg.trials);
  EXPECT_EQ(result.failed_trials(), result.trials.size());
  EXPECT_EQ(result.summary.size(), cfg.R_grid.size());
  EXPECT_NE(result.trials_csv().find("failed"), std::string::npos);
}

TEST(IdentScan, RandomControlJumps) {
  auto cfg = small_config();
  cfg.random = {60, 40, 2};
  cfg.scan_L_hi = 6;
  const auto res = run_identifiability_scan(cfg);
  ASSERT_TRUE(res.random_control.has_value());
  const auto& pts = res.random_control->points;
  EXPECT_LT(pts.front().fraction_partial, 1.0);  // L=1, N > 4
  EXPECT_EQ(pts.back().fraction_partial, 1.0);   // 4^6 >> N
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GE(pts[i].fraction_partial, pts[i - 1].fraction_partial);
  EXPECT_EQ(count_lines(res.csv()), 1 + 2 * pts.size());
  EXPECT_EQ(res.csv(), run_identifiability_scan(cfg).csv());
}
