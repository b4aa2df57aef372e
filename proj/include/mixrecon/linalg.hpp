#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixrecon/read_matrix.hpp"
#include "mixrecon/rng.hpp"

namespace mixrecon {

// Column groups of the bipartite (row, column) graph of A's nonzeros. Each group
// is ascending; groups are ordered by their smallest column.
inline std::vector<std::vector<std::size_t>> decompose_components(const SparseMat& A) {
  const auto n = static_cast<std::size_t>(A.cols());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::vector<std::int64_t> first_col(static_cast<std::size_t>(A.rows()), -1);
  for (std::size_t j = 0; j < n; ++j) {
    for (SparseMat::InnerIterator it(A, static_cast<Eigen::Index>(j)); it; ++it) {
      auto& f = first_col[static_cast<std::size_t>(it.row())];
      if (f < 0) {
        f = static_cast<std::int64_t>(j);
      } else {
        const auto a = find(j);
        const auto b = find(static_cast<std::size_t>(f));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::int64_t> group_of(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    const auto root = find(j);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<std::int64_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[root])].push_back(j);
  }
  return groups;
}

inline std::vector<std::vector<std::size_t>> decompose_components(const ReadSamplingMatrix& A) {
  return decompose_components(A.entries());
}

// Columns `cols` of A with identical rows merged: a row repeated k times is kept
// once, scaled by sqrt(k). This leaves the Gram matrix, hence the singular
// values and right singular vectors, unchanged.
struct CompressedColumns {
  SparseMat matrix;                 // distinct rows x |cols|
  std::size_t original_rows = 0;    // rows of A touched by the columns
};

inline CompressedColumns compress_columns(const SparseMat& A, std::span<const std::size_t> cols) {
  const SparseMat sub = select_columns(A, cols);
  const Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t> by_row = sub;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::int64_t> representative;
  std::vector<double> multiplicity;
  std::size_t touched = 0;
  std::string key;
  for (Eigen::Index i = 0; i < by_row.outerSize(); ++i) {
    key.clear();
    for (decltype(by_row)::InnerIterator it(by_row, i); it; ++it) {
      const auto col = static_cast<std::uint32_t>(it.col());
      const double v = it.value();
      key.append(reinterpret_cast<const char*>(&col), sizeof(col));
      key.append(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    if (key.empty()) continue;
    ++touched;
    auto [pos, inserted] = index.try_emplace(key, representative.size());
    if (inserted) {
      representative.push_back(i);
      multiplicity.push_back(1.0);
    } else {
      multiplicity[pos->second] += 1.0;
    }
  }
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  for (std::size_t r = 0; r < representative.size(); ++r) {
    const double scale = std::sqrt(multiplicity[r]);
    for (decltype(by_row)::InnerIterator it(by_row, representative[r]); it; ++it) {
      triplets.emplace_back(static_cast<std::int64_t>(r), it.col(), scale * it.value());
    }
  }
  CompressedColumns out;
  out.matrix.resize(static_cast<Eigen::Index>(representative.size()), static_cast<Eigen::Index>(cols.size()));
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.original_rows = touched;
  return out;
}

// Singular values and (optionally) an orthonormal null-space basis of a dense
// matrix, with numerical rank taken against tol * sigma_max * max(dims).
struct SpectralAnalysis {
  Eigen::VectorXd singular_values;  // descending, length min(rows, cols)
  std::size_t rank = 0;
  double threshold = 0.0;
  Eigen::MatrixXd null_basis;       // cols x (cols - rank); empty unless requested
};

namespace detail {

inline constexpr Eigen::Index kSmallSvd = 64;

inline std::size_t count_above(const Eigen::VectorXd& s, double threshold) {
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > threshold) ++r;
  }
  return r;
}

}  // namespace detail

// `rank_rows` is the row count used in the rank threshold; pass the
// uncompressed row count when M has had duplicate rows merged.
inline SpectralAnalysis spectral_analysis(const Eigen::MatrixXd& M, double tol, std::size_t rank_rows, bool want_null) {
  const Eigen::Index m = M.rows();
  const Eigen::Index n = M.cols();
  SpectralAnalysis out;
  const double dims = static_cast<double>(std::max<std::size_t>(rank_rows, static_cast<std::size_t>(n)));
  auto finish = [&](Eigen::VectorXd s) {
    out.singular_values = std::move(s);
    const double smax = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
    out.threshold = tol * smax * dims;
    out.rank = detail::count_above(out.singular_values, out.threshold);
  };
  if (n == 0) {
    finish(Eigen::VectorXd{});
    out.null_basis.resize(0, 0);
    return out;
  }
  if (m == 0) {
    finish(Eigen::VectorXd{});
    if (want_null) out.null_basis = Eigen::MatrixXd::Identity(n, n);
    return out;
  }

  if (std::max(m, n) <= detail::kSmallSvd) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, want_null ? Eigen::ComputeFullV : 0);
    finish(svd.singularValues());
    if (want_null) out.null_basis = svd.matrixV().rightCols(n - static_cast<Eigen::Index>(out.rank));
    return out;
  }

  if (m >= n) {
    // Tall: SVD of the triangular factor has the same singular values and V.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(R, want_null ? Eigen::ComputeFullV : 0);
    finish(svd.singularValues());
    if (want_null) out.null_basis = svd.matrixV().rightCols(n - static_cast<Eigen::Index>(out.rank));
    return out;
  }

  // Wide: M^T = Q [R1; 0], so M = R1^T Q1^T and the right singular vectors are
  // Q1 W (W from the SVD of R1^T) completed by Q2.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M.transpose());
  const Eigen::MatrixXd R1t = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>().transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(R1t, want_null ? Eigen::ComputeFullV : 0);
  finish(svd.singularValues());
  if (want_null) {
    const Eigen::MatrixXd Q = qr.householderQ();
    const auto r = static_cast<Eigen::Index>(out.rank);
    out.null_basis.resize(n, n - r);
    out.null_basis.leftCols(m - r) = Q.leftCols(m) * svd.matrixV().rightCols(m - r);
    out.null_basis.rightCols(n - m) = Q.rightCols(n - m);
  }
  return out;
}

// Gaussian sketch G * M with `rows` rows; preserves the row space (hence rank
// and null space) of M with probability one when rows >= rank(M). M's rows are
// consumed in chunks so G is never held whole.
inline Eigen::MatrixXd gaussian_row_sketch(const SparseMat& M, Eigen::Index rows, std::uint64_t seed) {
  constexpr Eigen::Index kChunk = 4096;
  Rng rng(seed);
  const Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t> by_row = M;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, M.cols());
  Eigen::MatrixXd G(rows, kChunk);
  for (Eigen::Index start = 0; start < M.rows(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, M.rows() - start);
    for (Eigen::Index j = 0; j < len; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        // Box-Muller; u1 in (0, 1].
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        G(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
      }
    }
    out += G.leftCols(len) * by_row.middleRows(start, len);
  }
  return out;
}

}  // namespace mixrecon
