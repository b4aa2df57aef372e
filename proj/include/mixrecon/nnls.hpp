#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mixrecon/error.hpp"
#include "mixrecon/read_matrix.hpp"

namespace mixrecon {

struct NnlsOptions {
  double kkt_tol = 1e-8;
  std::size_t max_iter = 0;  // 0: 3 * columns + 50
  double x_tol = 1e-10;      // entries above this count as strictly positive
  bool record_objective = false;
};

// Nonnegative minimizer of ||A x - y||_2 with its optimality certificate.
// With g = A^T (A x - y): g_j >= -kkt_tol everywhere and |g_j| <= kkt_tol
// wherever x_j > x_tol.
struct NnlsSolution {
  Eigen::VectorXd x;
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  std::vector<double> objective_trace;  // 0.5 x'Gx - b'x after each step
};

// Largest violation of the KKT conditions of min 0.5 x'Gx - b'x, x >= 0.
inline double kkt_residual(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                           double x_tol = 1e-10) {
  const Eigen::VectorXd g = G * x - b;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    worst = std::max(worst, -g[j]);
    if (x[j] > x_tol) worst = std::max(worst, std::abs(g[j]));
  }
  return worst;
}

// Lawson-Hanson active set on the normal equations G = A^T A, b = A^T y.
inline NnlsSolution nnls_solve_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const NnlsOptions& opt = {}) {
  const Eigen::Index n = G.rows();
  if (G.cols() != n || b.size() != n) throw InvalidArgument("Gram system dimensions disagree");
  NnlsSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  const std::size_t max_iter = opt.max_iter > 0 ? opt.max_iter : static_cast<std::size_t>(3 * n + 50);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd& x = sol.x;
  Eigen::VectorXd w = b;
  auto objective = [&] { return 0.5 * x.dot(G * x) - b.dot(x); };

  std::vector<Eigen::Index> P;
  Eigen::VectorXd z;
  // Solves G_PP z_P = b_P; returns false if the factorization failed.
  auto solve_passive = [&]() {
    P.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) P.push_back(j);
    }
    const auto p = static_cast<Eigen::Index>(P.size());
    Eigen::MatrixXd Gp(p, p);
    Eigen::VectorXd bp(p);
    for (Eigen::Index a = 0; a < p; ++a) {
      bp[a] = b[P[static_cast<std::size_t>(a)]];
      for (Eigen::Index c = 0; c < p; ++c) Gp(a, c) = G(P[static_cast<std::size_t>(a)], P[static_cast<std::size_t>(c)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Gp);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    if (d.size() > 0 && d.minCoeff() <= 1e-12 * d.maxCoeff()) sol.rank_deficient = true;
    const Eigen::VectorXd zp = ldlt.solve(bp);
    z = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < p; ++a) z[P[static_cast<std::size_t>(a)]] = zp[a];
    return zp.allFinite();
  };

  while (sol.iterations < max_iter) {
    Eigen::Index best = -1;
    double wmax = opt.kkt_tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (!passive[k] && !excluded[k] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    ++sol.iterations;
    passive[static_cast<std::size_t>(best)] = 1;

    bool progressed = false;
    while (sol.iterations <= max_iter) {
      if (!solve_passive()) break;
      if (!progressed && z[best] <= 0.0) {
        // The entering column cannot move the objective; skip it until x changes.
        passive[static_cast<std::size_t>(best)] = 0;
        excluded[static_cast<std::size_t>(best)] = 1;
        break;
      }
      bool feasible = true;
      for (auto j : P) feasible = feasible && z[j] > 0.0;
      if (feasible) {
        x = z;
        progressed = true;
        break;
      }
      double alpha = 1.0;
      for (auto j : P) {
        if (z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      }
      x += alpha * (z - x);
      progressed = true;
      for (auto j : P) {
        if (x[j] <= 0.0 || (z[j] <= 0.0 && x[j] <= opt.x_tol * 1e-3)) {
          x[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = 0;
        }
      }
      ++sol.iterations;
    }
    if (progressed) std::fill(excluded.begin(), excluded.end(), 0);
    if (opt.record_objective) sol.objective_trace.push_back(objective());
    w = b - G * x;
  }
  x = x.cwiseMax(0.0);
  sol.kkt_residual = kkt_residual(G, b, x, opt.x_tol);
  sol.converged = sol.kkt_residual <= opt.kkt_tol;
  return sol;
}

namespace detail {

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& A) { return A.transpose() * A; }
inline Eigen::MatrixXd gram(const SparseMat& A) { return Eigen::MatrixXd(SparseMat(A.transpose() * A)); }
inline Eigen::VectorXd dense(const Eigen::VectorXd& y) { return y; }
inline Eigen::VectorXd dense(const SparseVec& y) { return Eigen::VectorXd(y); }

}  // namespace detail

// min ||A x - y||_2 s.t. x >= 0 for dense or sparse A and y.
template <typename Matrix, typename Vector>
NnlsSolution nnls_solve(const Matrix& A, const Vector& y, const NnlsOptions& opt = {}) {
  if (A.rows() != y.size()) {
    throw InvalidArgument("design has " + std::to_string(A.rows()) + " rows but y has " + std::to_string(y.size()) +
                          " entries");
  }
  const Eigen::VectorXd yd = detail::dense(y);
  if ((yd.array() < 0.0).any()) throw InvalidArgument("y must be nonnegative");
  const Eigen::MatrixXd G = detail::gram(A);
  const Eigen::VectorXd b = A.transpose() * yd;
  NnlsSolution sol = nnls_solve_gram(G, b, opt);
  sol.residual_norm = (A * sol.x - yd).norm();
  return sol;
}

inline FrequencyVector normalize_simplex(const Eigen::VectorXd& x, FrequencyKind kind = FrequencyKind::species) {
  if ((x.array() < 0.0).any()) throw InvalidArgument("normalize_simplex expects a nonnegative vector");
  const double total = x.sum();
  if (!(total > 0.0)) throw InvalidArgument("cannot normalize an all-zero vector");
  return {x / total, kind, true};
}

}  // namespace mixrecon
