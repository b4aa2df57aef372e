#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mixrecon/error.hpp"
#include "mixrecon/linalg.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"

namespace mixrecon {

inline double l2_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) {
    throw InvalidArgument("l2 metric: lengths " + std::to_string(x.size()) + " and " + std::to_string(x_hat.size()));
  }
  return (x - x_hat).norm();
}

inline double l2_metric(const FrequencyVector& x, const FrequencyVector& x_hat) { return l2_metric(x.values, x_hat.values); }

// sqrt((x - x^)' A'A (x - x^)) evaluated as ||A (x - x^)||; A'A is never formed.
inline double mahalanobis_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, const SparseMat& A) {
  if (x.size() != A.cols() || x_hat.size() != A.cols()) {
    throw InvalidArgument("Mahalanobis metric: vectors must have " + std::to_string(A.cols()) + " entries");
  }
  return (A * (x - x_hat)).norm();
}

inline double mahalanobis_metric(const FrequencyVector& x, const FrequencyVector& x_hat, const ReadSamplingMatrix& A) {
  return mahalanobis_metric(x.values, x_hat.values, A.entries());
}

namespace detail {

inline void check_bound_args(std::uint64_t R, double delta) {
  if (R < 1) throw InvalidArgument("number of reads must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
}

}  // namespace detail

// With probability >= 1 - delta the Mahalanobis error is below this; it does
// not depend on A or N.
inline double mahalanobis_error_bound(std::uint64_t R, double delta) {
  detail::check_bound_args(R, delta);
  return (2.0 + std::sqrt(std::log(1.0 / delta))) / std::sqrt(static_cast<double>(R));
}

inline constexpr double kLambdaTolerance = 1e-12;

// l2 counterpart; +infinity when lambda_min <= tol (non-identifiable: the
// error is not bounded).
inline double l2_error_bound(std::uint64_t R, double delta, double lambda_min, double tol = kLambdaTolerance) {
  detail::check_bound_args(R, delta);
  if (!(lambda_min > tol)) return std::numeric_limits<double>::infinity();
  return (2.0 + std::sqrt(std::log(1.0 / delta))) / std::sqrt(static_cast<double>(R) * lambda_min);
}

struct SpectrumOptions {
  std::size_t dense_cap = 5000;
  std::size_t workers = 0;
};

// Smallest eigenvalue of A'A: the minimum over connected components of the
// squared smallest singular value of each component.
inline double lambda_min(const SparseMat& A, const SpectrumOptions& opt = {}) {
  const auto groups = decompose_components(A);
  for (const auto& g : groups) {
    if (g.size() > opt.dense_cap) {
      throw CapacityError("component with " + std::to_string(g.size()) + " columns exceeds the dense cap of " +
                          std::to_string(opt.dense_cap));
    }
  }
  std::vector<double> per_group(groups.size(), 0.0);
  parallel_for(groups.size(), opt.workers, [&](std::size_t gi) {
    const auto& g = groups[gi];
    if (g.size() == 1) {
      const double norm = A.col(static_cast<Eigen::Index>(g[0])).norm();
      per_group[gi] = norm * norm;
      return;
    }
    const auto comp = compress_columns(A, g);
    if (static_cast<std::size_t>(comp.matrix.rows()) < g.size()) {
      per_group[gi] = 0.0;
      return;
    }
    const auto sa = spectral_analysis(Eigen::MatrixXd(comp.matrix), 1e-10, comp.original_rows, false);
    const double smin = sa.singular_values[sa.singular_values.size() - 1];
    per_group[gi] = smin * smin;
  });
  return per_group.empty() ? 0.0 : *std::min_element(per_group.begin(), per_group.end());
}

inline double lambda_min(const ReadSamplingMatrix& A, const SpectrumOptions& opt = {}) { return lambda_min(A.entries(), opt); }

struct EvaluationResult {
  double l2_error = 0.0;            // on the scale A acts on (DNA-weighted)
  double mahalanobis_error = 0.0;
  double l2_error_species = 0.0;    // on species frequencies
  double l2_bound = std::numeric_limits<double>::infinity();  // infinite when not identifiable
  double mahalanobis_bound = 0.0;
  double delta = 0.5;
  std::optional<double> lambda_min;
  std::uint64_t R = 0;
};

// Errors of x^ against the truth x (both on the species scale) and the
// finite-sample bounds. Pass lambda to reuse a precomputed lambda_min; if it is
// absent the l2 bound is left infinite.
inline EvaluationResult evaluate(const FrequencyVector& truth, const FrequencyVector& estimate, const ReadSamplingMatrix& A,
                                 std::uint64_t R, double delta, std::optional<double> lambda = std::nullopt) {
  if (truth.kind != FrequencyKind::species || estimate.kind != FrequencyKind::species) {
    throw InvalidArgument("evaluate expects species-scale frequency vectors");
  }
  const auto truth_dna = reweight_to_dna(truth, A.col_lengths());
  const auto estimate_dna = reweight_to_dna(estimate, A.col_lengths());
  EvaluationResult out;
  out.R = R;
  out.delta = delta;
  out.l2_error = l2_metric(truth_dna, estimate_dna);
  out.l2_error_species = l2_metric(truth, estimate);
  out.mahalanobis_error = mahalanobis_metric(truth_dna, estimate_dna, A);
  out.mahalanobis_bound = mahalanobis_error_bound(R, delta);
  out.lambda_min = lambda;
  if (lambda) out.l2_bound = l2_error_bound(R, delta, *lambda);
  return out;
}

}  // namespace mixrecon
