#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixrecon/error.hpp"
#include "mixrecon/identifiability.hpp"
#include "mixrecon/metrics.hpp"
#include "mixrecon/mixture_sim.hpp"
#include "mixrecon/nnls.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/reconstruct.hpp"

namespace mixrecon {

using nlohmann::json;

// Non-finite values become null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

inline const char* to_string(FrequencyKind k) { return k == FrequencyKind::species ? "species_x" : "dna_weighted_x_prime"; }

inline json to_json(const FrequencyVector& x) {
  return {{"kind", to_string(x.kind)}, {"normalized", x.normalized}, {"values", vector_json(x.values)}};
}

inline FrequencyVector frequency_from_json(const json& j) {
  FrequencyVector x;
  const auto kind = j.value("kind", std::string("species_x"));
  if (kind == "species_x") {
    x.kind = FrequencyKind::species;
  } else if (kind == "dna_weighted_x_prime") {
    x.kind = FrequencyKind::dna_weighted;
  } else {
    throw FormatError("unknown frequency kind '" + kind + "'");
  }
  x.values = vector_from_json(j.at("values"));
  x.normalized = j.value("normalized", false);
  check_frequency_vector(x);
  return x;
}

inline json to_json(const MixtureSpec& m) {
  return {{"N", m.num_species},
          {"support", m.support},
          {"frequencies", vector_json(m.frequencies)},
          {"seed", m.seed},
          {"generator_tag", m.generator_tag},
          {"x", to_json(m.full())}};
}

inline MixtureSpec mixture_from_json(const json& j) {
  MixtureSpec m;
  m.num_species = j.at("N").get<std::size_t>();
  m.support = j.at("support").get<std::vector<int>>();
  m.frequencies = vector_from_json(j.at("frequencies"));
  m.seed = j.value("seed", std::uint64_t{0});
  m.generator_tag = j.value("generator_tag", std::string{});
  if (m.frequencies.size() != static_cast<Eigen::Index>(m.support.size())) {
    throw FormatError("mixture support and frequencies differ in length");
  }
  for (int id : m.support) {
    if (id < 1 || static_cast<std::size_t>(id) > m.num_species) throw FormatError("mixture support id out of range");
  }
  return m;
}

// Truth files may be a mixture spec or a bare frequency vector.
inline FrequencyVector truth_from_json(const json& j) {
  if (j.contains("support")) return mixture_from_json(j).full();
  if (j.contains("x")) return frequency_from_json(j.at("x"));
  return frequency_from_json(j);
}

inline json to_json(const NnlsSolution& s) {
  return {{"residual_norm", finite_or_null(s.residual_norm)},
          {"kkt_residual", finite_or_null(s.kkt_residual)},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"rank_deficient", s.rank_deficient}};
}

inline json to_json(const DncParams& p) {
  return {{"block_size", p.block_size},
          {"tau", p.tau},
          {"schedule", p.schedule},
          {"final_cap", p.final_cap},
          {"seed", p.seed},
          {"kkt_tol", p.kkt_tol},
          {"ambiguity", to_string(p.ambiguity)},
          {"max_iterations", p.max_iterations}};
}

inline void update_from_json(DncParams& p, const json& j) {
  p.block_size = j.value("block_size", p.block_size);
  p.tau = j.value("tau", p.tau);
  p.schedule = j.value("schedule", p.schedule);
  p.final_cap = j.value("final_cap", p.final_cap);
  p.seed = j.value("seed", p.seed);
  p.kkt_tol = j.value("kkt_tol", p.kkt_tol);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  if (j.contains("ambiguity")) {
    const auto rule = j.at("ambiguity").get<std::string>();
    if (rule == "retain_ambiguous") {
      p.ambiguity = AmbiguityRule::retain_ambiguous;
    } else if (rule == "literal_orthogonal") {
      p.ambiguity = AmbiguityRule::literal_orthogonal;
    } else {
      throw InvalidArgument("unknown ambiguity rule '" + rule + "'");
    }
  }
}

inline json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"survivors_in", r.survivors_in},
          {"partitions", r.partitions},
          {"blocks_solved", r.blocks_solved},
          {"marked_by_threshold", r.marked_by_threshold},
          {"marked_ambiguous", r.marked_ambiguous},
          {"survivors_out", r.survivors_out},
          {"unconverged_blocks", r.unconverged_blocks}};
}

inline json to_json(const ReconstructionReport& r) {
  json iterations = json::array();
  for (const auto& it : r.iterations) iterations.push_back(to_json(it));
  return {{"x_hat_dna", to_json(r.x_hat)},
          {"support", r.support},
          {"final_candidates", r.final_candidates},
          {"iterations", iterations},
          {"final_solver", to_json(r.final_solution)},
          {"seed", r.seed},
          {"params", to_json(r.params)},
          {"unconverged_blocks", r.unconverged_blocks},
          {"diagnostics", r.diagnostics}};
}

inline json to_json(const EvaluationResult& e) {
  return {{"l2_error", e.l2_error},
          {"mahalanobis_error", e.mahalanobis_error},
          {"l2_error_species", e.l2_error_species},
          {"l2_bound", finite_or_null(e.l2_bound)},
          {"mahalanobis_bound", e.mahalanobis_bound},
          {"delta", e.delta},
          {"lambda_min", e.lambda_min ? json(*e.lambda_min) : json(nullptr)},
          {"R", e.R}};
}

inline json to_json(const IdentifiabilityReport& r) {
  json flags = json::array();
  for (bool f : r.partial_flags) flags.push_back(f);
  return {{"identifiable", r.identifiable},
          {"rank", r.rank},
          {"N", r.num_species},
          {"null_space_dim", r.null_space_dim},
          {"fraction_partial", r.fraction_partial()},
          {"partial_flags", flags},
          {"tolerance_used", r.tolerance_used},
          {"method", to_string(r.method)},
          {"approximate", r.approximate},
          {"components", r.components},
          {"largest_component", r.largest_component}};
}

inline json to_json(const ScanReport& s) {
  json points = json::array();
  for (const auto& p : s.points) {
    points.push_back({{"L", p.L},
                      {"K", p.rows},
                      {"rank", p.rank},
                      {"partially_identifiable", p.partially_identifiable},
                      {"fraction_partial", p.fraction_partial},
                      {"identifiable", p.identifiable},
                      {"approximate", p.approximate}});
  }
  return {{"points", points},
          {"critical_read_length", s.critical_read_length ? json(*s.critical_read_length) : json(nullptr)},
          {"substring_free", s.substring_free},
          {"warnings", s.warnings},
          {"violations", s.violations}};
}

}  // namespace mixrecon
