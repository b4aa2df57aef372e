#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixrecon/error.hpp"
#include "mixrecon/identifiability.hpp"
#include "mixrecon/nnls.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/rng.hpp"

namespace mixrecon {

// Which species step 1(d) of the block loop keeps besides the thresholded ones.
//   retain_ambiguous: species NOT determined within their block (default).
//   literal_orthogonal: species orthogonal to the block null space.
enum class AmbiguityRule { retain_ambiguous, literal_orthogonal };

inline const char* to_string(AmbiguityRule r) {
  return r == AmbiguityRule::retain_ambiguous ? "retain_ambiguous" : "literal_orthogonal";
}

struct DncParams {
  std::size_t block_size = 1000;          // B
  double tau = 1e-3;                      // per-block frequency threshold
  std::vector<std::size_t> schedule;      // partitions per iteration; empty = default rule
  std::size_t final_cap = 1000;           // k_F
  std::uint64_t seed = 0;
  double kkt_tol = 1e-8;
  AmbiguityRule ambiguity = AmbiguityRule::retain_ambiguous;
  std::size_t max_iterations = 50;
  std::size_t workers = 0;
  IdentifiabilityOptions ident{};

  void validate() const {
    if (block_size < 2) throw InvalidArgument("block size must be at least 2");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("threshold tau must lie in (0, 1)");
    if (final_cap < 1) throw InvalidArgument("final cap k_F must be at least 1");
    if (!(kkt_tol > 0.0)) throw InvalidArgument("KKT tolerance must be positive");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
    for (auto k : schedule) {
      if (k < 1) throw InvalidArgument("partition schedule entries must be at least 1");
    }
  }
};

// Partitions per round at iteration j (1-based). Default: 1 on the first
// iteration, then 10 once |V| < 0.33 N and 20 once |V| < 0.05 N.
inline std::size_t partitions_for(const DncParams& p, std::size_t iteration, std::size_t survivors, std::size_t N) {
  if (!p.schedule.empty()) return p.schedule[std::min(iteration, p.schedule.size()) - 1];
  if (iteration <= 1) return 1;
  const double frac = static_cast<double>(survivors) / static_cast<double>(std::max<std::size_t>(N, 1));
  if (frac < 0.05) return 20;
  if (frac < 0.33) return 10;
  return 1;
}

// Random split of `ids` into consecutive blocks of B (last one may be smaller),
// seeded by (seed, iteration, round).
inline std::vector<std::vector<std::size_t>> partition_species(std::span<const std::size_t> ids, std::size_t B,
                                                               std::uint64_t seed, std::size_t iteration,
                                                               std::size_t round) {
  if (B < 2) throw InvalidArgument("block size must be at least 2");
  std::vector<std::size_t> order(ids.begin(), ids.end());
  Rng rng(derive_seed(seed, iteration, round));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start < order.size(); start += B) {
    const auto end = std::min(order.size(), start + B);
    blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return blocks;
}

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t survivors_in = 0;
  std::size_t partitions = 0;
  std::size_t blocks_solved = 0;
  std::size_t marked_by_threshold = 0;
  std::size_t marked_ambiguous = 0;
  std::size_t survivors_out = 0;
  std::size_t unconverged_blocks = 0;
};

struct ReconstructionReport {
  FrequencyVector x_hat;                 // DNA-weighted scale, length N
  std::vector<int> support;              // 1-based ids with x_hat > x_tol
  std::vector<int> final_candidates;     // 1-based ids entering the final solve
  std::vector<IterationRecord> iterations;
  NnlsSolution final_solution;           // x indexed like final_candidates
  std::uint64_t seed = 0;
  DncParams params;
  std::size_t unconverged_blocks = 0;
  std::vector<std::string> diagnostics;
};

namespace detail {

struct BlockOutcome {
  std::vector<std::size_t> by_threshold;
  std::vector<std::size_t> ambiguous;
  bool converged = true;
};

inline BlockOutcome solve_block(const SparseMat& A, const Eigen::VectorXd& y, std::span<const std::size_t> block,
                                const DncParams& p) {
  const SparseMat sub = select_columns(A, block);
  const Eigen::MatrixXd G = gram(sub);
  const Eigen::VectorXd b = sub.transpose() * y;
  NnlsOptions opt;
  opt.kkt_tol = p.kkt_tol;
  NnlsSolution sol = nnls_solve_gram(G, b, opt);
  BlockOutcome out;
  if (!sol.converged) {
    opt.max_iter = 4 * (3 * block.size() + 50);
    sol = nnls_solve_gram(G, b, opt);
  }
  out.converged = sol.converged;
  for (std::size_t k = 0; k < block.size(); ++k) {
    const double v = sol.x[static_cast<Eigen::Index>(k)];
    // Unconverged blocks pass every positive entry through.
    if (v >= p.tau || (!sol.converged && v > opt.x_tol)) out.by_threshold.push_back(block[k]);
  }
  IdentifiabilityOptions ident = p.ident;
  ident.workers = 1;
  const auto flags = partially_identifiable(sub, ident);
  for (std::size_t k = 0; k < block.size(); ++k) {
    const bool keep = p.ambiguity == AmbiguityRule::retain_ambiguous ? !flags[k] : static_cast<bool>(flags[k]);
    if (keep) out.ambiguous.push_back(block[k]);
  }
  return out;
}

}  // namespace detail

// Divide-and-conquer thresholding: repeated random blockings with per-block
// NNLS against the full y, keeping species above tau (or ambiguous within
// their block) until at most k_F remain; then one NNLS on the survivors,
// normalized to the simplex.
inline ReconstructionReport divide_and_conquer(const SparseMat& A, const SparseVec& y, const DncParams& params) {
  params.validate();
  if (A.rows() != y.size()) {
    throw InvalidArgument("y has " + std::to_string(y.size()) + " rows, matrix has " + std::to_string(A.rows()));
  }
  const auto N = static_cast<std::size_t>(A.cols());
  const Eigen::VectorXd yd = Eigen::VectorXd(y);
  if ((yd.array() < 0.0).any()) throw InvalidArgument("y must be nonnegative");

  ReconstructionReport rep;
  rep.seed = params.seed;
  rep.params = params;
  rep.x_hat = {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N)), FrequencyKind::dna_weighted, false};

  std::vector<std::size_t> V(N);
  for (std::size_t j = 0; j < N; ++j) V[j] = j;
  std::size_t stalls = 0;
  for (std::size_t iteration = 1;; ++iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.survivors_in = V.size();
    rec.partitions = partitions_for(params, iteration, V.size(), N);
    std::vector<char> marked(N, 0);
    for (std::size_t round = 0; round < rec.partitions; ++round) {
      const auto blocks = partition_species(V, params.block_size, params.seed, iteration, round);
      std::vector<detail::BlockOutcome> outcomes(blocks.size());
      parallel_for(blocks.size(), params.workers,
                   [&](std::size_t b) { outcomes[b] = detail::solve_block(A, yd, blocks[b], params); });
      rec.blocks_solved += blocks.size();
      for (const auto& o : outcomes) {
        if (!o.converged) ++rec.unconverged_blocks;
        for (auto j : o.by_threshold) {
          if (!marked[j]) ++rec.marked_by_threshold;
          marked[j] = 1;
        }
        for (auto j : o.ambiguous) {
          if (!marked[j]) ++rec.marked_ambiguous;
          marked[j] = 1;
        }
      }
    }
    std::vector<std::size_t> next;
    for (auto j : V) {
      if (marked[j]) next.push_back(j);
    }
    rec.survivors_out = next.size();
    rep.unconverged_blocks += rec.unconverged_blocks;
    rep.iterations.push_back(rec);
    if (rec.unconverged_blocks > 0) {
      rep.diagnostics.push_back("iteration " + std::to_string(iteration) + ": " + std::to_string(rec.unconverged_blocks) +
                                " block solve(s) did not converge; their positive entries were kept");
    }
    if (next.empty()) {
      rep.diagnostics.push_back("no species survived the block thresholds");
      return rep;
    }
    const bool shrank = next.size() < V.size();
    V = std::move(next);
    if (V.size() <= params.final_cap) break;
    stalls = shrank ? 0 : stalls + 1;
    if (stalls >= 3 || iteration >= params.max_iterations) {
      rep.diagnostics.push_back("survivor set stopped shrinking at " + std::to_string(V.size()) +
                                " species (above k_F); solving on it directly");
      break;
    }
  }

  const SparseMat sub = select_columns(A, V);
  NnlsOptions opt;
  opt.kkt_tol = params.kkt_tol;
  rep.final_solution = nnls_solve(sub, yd, opt);
  if (!rep.final_solution.converged) rep.diagnostics.push_back("final NNLS solve did not converge");
  for (auto j : V) rep.final_candidates.push_back(static_cast<int>(j) + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < V.size(); ++k) x[static_cast<Eigen::Index>(V[k])] = rep.final_solution.x[static_cast<Eigen::Index>(k)];
  if (!(x.sum() > 0.0)) {
    rep.diagnostics.push_back("final solve returned the zero vector");
    return rep;
  }
  rep.x_hat = normalize_simplex(x, FrequencyKind::dna_weighted);
  for (std::size_t j = 0; j < N; ++j) {
    if (rep.x_hat.values[static_cast<Eigen::Index>(j)] > opt.x_tol) rep.support.push_back(static_cast<int>(j) + 1);
  }
  return rep;
}

inline ReconstructionReport divide_and_conquer(const ReadSamplingMatrix& A, const SparseVec& y, const DncParams& params) {
  return divide_and_conquer(A.entries(), y, params);
}

}  // namespace mixrecon
