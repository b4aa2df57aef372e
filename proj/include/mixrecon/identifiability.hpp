#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mixrecon/error.hpp"
#include "mixrecon/linalg.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/sequence_db.hpp"

namespace mixrecon {

struct IdentifiabilityOptions {
  double tol = 1e-10;          // relative singular-value threshold
  double flag_tol = 1e-8;      // max null-basis row norm for a determined species
  bool decompose = true;       // analyze connected components separately
  std::size_t dense_cap = 5000;  // larger components use a randomized sketch
  std::uint64_t sketch_seed = 0x5eed;
  std::size_t workers = 0;
};

enum class RankMethod { dense_svd, component_decomposed };

inline const char* to_string(RankMethod m) {
  return m == RankMethod::dense_svd ? "dense_svd" : "component_decomposed";
}

// Rank and null space of A with a ones row appended (per component when
// decomposed). identifiable <=> rank == N <=> null_space_dim == 0.
struct IdentifiabilityReport {
  bool identifiable = false;
  std::size_t rank = 0;
  std::size_t num_species = 0;
  std::vector<bool> partial_flags;  // empty when flags were not requested
  std::size_t null_space_dim = 0;
  double tolerance_used = 0.0;
  RankMethod method = RankMethod::component_decomposed;
  bool approximate = false;
  std::size_t components = 0;
  std::size_t largest_component = 0;

  double fraction_partial() const {
    if (partial_flags.empty()) return identifiable ? 1.0 : 0.0;
    const auto n = std::count(partial_flags.begin(), partial_flags.end(), true);
    return static_cast<double>(n) / static_cast<double>(partial_flags.size());
  }
};

namespace detail {

struct GroupResult {
  std::size_t rank = 0;
  std::vector<bool> flags;
  bool approximate = false;
};

inline GroupResult analyze_group(const SparseMat& A, std::span<const std::size_t> cols,
                                 const IdentifiabilityOptions& opt, bool want_flags, std::uint64_t group_seed) {
  const auto c = static_cast<Eigen::Index>(cols.size());
  GroupResult res;
  if (c == 1) {
    // [a; 1] always has rank one.
    res.rank = 1;
    if (want_flags) res.flags.assign(1, true);
    return res;
  }
  CompressedColumns comp = compress_columns(A, cols);
  // Append the ones row.
  SparseMat augmented(comp.matrix.rows() + 1, c);
  {
    std::vector<Eigen::Triplet<double, std::int64_t>> t;
    t.reserve(static_cast<std::size_t>(comp.matrix.nonZeros() + c));
    for (Eigen::Index j = 0; j < comp.matrix.outerSize(); ++j) {
      for (SparseMat::InnerIterator it(comp.matrix, j); it; ++it) t.emplace_back(it.row(), j, it.value());
      t.emplace_back(comp.matrix.rows(), j, 1.0);
    }
    augmented.setFromTriplets(t.begin(), t.end());
  }
  SpectralAnalysis sa;
  if (static_cast<std::size_t>(c) > opt.dense_cap) {
    const Eigen::Index sketch_rows = std::min<Eigen::Index>(augmented.rows(), c + 16);
    const Eigen::MatrixXd sketch = sketch_rows == augmented.rows()
                                       ? Eigen::MatrixXd(augmented)
                                       : gaussian_row_sketch(augmented, sketch_rows, group_seed);
    sa = spectral_analysis(sketch, opt.tol, comp.original_rows + 1, want_flags);
    res.approximate = sketch_rows != augmented.rows();
  } else {
    sa = spectral_analysis(Eigen::MatrixXd(augmented), opt.tol, comp.original_rows + 1, want_flags);
  }
  res.rank = sa.rank;
  if (want_flags) {
    res.flags.resize(cols.size());
    for (Eigen::Index j = 0; j < c; ++j) {
      const double norm = sa.null_basis.cols() > 0 ? sa.null_basis.row(j).norm() : 0.0;
      res.flags[static_cast<std::size_t>(j)] = norm <= opt.flag_tol;
    }
  }
  return res;
}

}  // namespace detail

inline IdentifiabilityReport analyze_identifiability(const SparseMat& A, const IdentifiabilityOptions& opt = {},
                                                     bool want_flags = true) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("identifiability tolerance must be positive");
  const auto N = static_cast<std::size_t>(A.cols());
  IdentifiabilityReport rep;
  rep.num_species = N;
  rep.tolerance_used = opt.tol;
  std::vector<std::vector<std::size_t>> groups;
  if (opt.decompose) {
    groups = decompose_components(A);
    rep.method = RankMethod::component_decomposed;
  } else {
    if (N > opt.dense_cap) {
      throw CapacityError("N=" + std::to_string(N) + " exceeds the dense cap of " + std::to_string(opt.dense_cap) +
                          " columns; enable component decomposition");
    }
    groups.emplace_back(N);
    std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
    rep.method = RankMethod::dense_svd;
  }
  rep.components = groups.size();
  std::vector<detail::GroupResult> results(groups.size());
  parallel_for(groups.size(), opt.workers, [&](std::size_t g) {
    results[g] = detail::analyze_group(A, groups[g], opt, want_flags, derive_seed(opt.sketch_seed, g));
  });
  if (want_flags) rep.partial_flags.assign(N, false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    rep.rank += results[g].rank;
    rep.approximate = rep.approximate || results[g].approximate;
    rep.largest_component = std::max(rep.largest_component, groups[g].size());
    if (want_flags) {
      for (std::size_t k = 0; k < groups[g].size(); ++k) rep.partial_flags[groups[g][k]] = results[g].flags[k];
    }
  }
  rep.null_space_dim = N - rep.rank;
  rep.identifiable = rep.rank == N;
  return rep;
}

inline IdentifiabilityReport analyze_identifiability(const ReadSamplingMatrix& A, const IdentifiabilityOptions& opt = {},
                                                     bool want_flags = true) {
  return analyze_identifiability(A.entries(), opt, want_flags);
}

struct IdentifiabilityResult {
  bool identifiable = false;
  std::size_t rank = 0;
};

inline IdentifiabilityResult is_identifiable(const ReadSamplingMatrix& A, const IdentifiabilityOptions& opt = {}) {
  const auto rep = analyze_identifiability(A, opt, false);
  return {rep.identifiable, rep.rank};
}

// Species j is determined by the read distribution iff e_j is orthogonal to
// the null space of the augmented matrix.
inline std::vector<bool> partially_identifiable(const SparseMat& A, const IdentifiabilityOptions& opt = {}) {
  return analyze_identifiability(A, opt, true).partial_flags;
}

inline std::vector<bool> partially_identifiable(const ReadSamplingMatrix& A, const IdentifiabilityOptions& opt = {}) {
  return partially_identifiable(A.entries(), opt);
}

// First pair (shorter_id, longer_id), 1-based, where the shorter sequence occurs
// inside the longer one.
inline std::optional<std::pair<int, int>> find_contained_sequence(const SequenceDatabase& db) {
  std::vector<std::size_t> lengths;
  for (const auto& r : db.records()) lengths.push_back(r.length());
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  for (std::size_t len : lengths) {
    std::unordered_map<std::string_view, int> shorter;
    for (const auto& r : db.records()) {
      if (r.length() == len) shorter.emplace(r.sequence, r.id);
    }
    for (const auto& r : db.records()) {
      if (r.length() <= len) continue;
      const std::string_view s = r.sequence;
      for (std::size_t k = 0; k + len <= s.size(); ++k) {
        if (auto it = shorter.find(s.substr(k, len)); it != shorter.end()) return std::make_pair(it->second, r.id);
      }
    }
  }
  return std::nullopt;
}

struct ScanPoint {
  int L = 0;
  std::size_t rows = 0;
  std::size_t rank = 0;
  std::size_t partially_identifiable = 0;
  double fraction_partial = 0.0;
  bool identifiable = false;
  bool approximate = false;
};

struct ScanReport {
  std::vector<ScanPoint> points;
  std::optional<int> critical_read_length;
  bool substring_free = true;
  std::vector<std::string> warnings;
  std::vector<std::string> violations;  // monotonicity failures on a substring-free database
};

// Identifiability across read lengths; L_c is the smallest scanned L that is
// fully identifiable.
inline ScanReport critical_read_length_scan(const SequenceDatabase& db, int L_lo, int L_hi,
                                            const IdentifiabilityOptions& opt = {}) {
  if (L_lo < 1 || L_hi < L_lo) {
    throw InvalidArgument("empty read-length range [" + std::to_string(L_lo) + ", " + std::to_string(L_hi) + "]");
  }
  ScanReport out;
  if (auto pair = find_contained_sequence(db)) {
    out.substring_free = false;
    out.warnings.push_back("sequence " + std::to_string(pair->first) + " occurs inside sequence " +
                           std::to_string(pair->second) + "; monotonicity in L is not guaranteed");
  }
  for (int L = L_lo; L <= L_hi; ++L) {
    const auto A = build_matrix(db, L, opt.workers);
    const auto rep = analyze_identifiability(A, opt, true);
    ScanPoint p;
    p.L = L;
    p.rows = A.rows();
    p.rank = rep.rank;
    p.partially_identifiable = static_cast<std::size_t>(std::count(rep.partial_flags.begin(), rep.partial_flags.end(), true));
    p.fraction_partial = rep.fraction_partial();
    p.identifiable = rep.identifiable;
    p.approximate = rep.approximate;
    if (!out.points.empty()) {
      const auto& prev = out.points.back();
      auto& sink = out.substring_free ? out.violations : out.warnings;
      if (prev.identifiable && !p.identifiable) {
        sink.push_back("identifiable at L=" + std::to_string(prev.L) + " but not at L=" + std::to_string(L));
      }
      if (p.partially_identifiable < prev.partially_identifiable) {
        sink.push_back("partially identifiable species drop from " + std::to_string(prev.partially_identifiable) +
                                 " at L=" + std::to_string(prev.L) + " to " + std::to_string(p.partially_identifiable) +
                                 " at L=" + std::to_string(L));
      }
    }
    if (p.identifiable && !out.critical_read_length) out.critical_read_length = L;
    out.points.push_back(p);
  }
  return out;
}

}  // namespace mixrecon
