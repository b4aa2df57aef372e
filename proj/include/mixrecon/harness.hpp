#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "mixrecon/error.hpp"
#include "mixrecon/identifiability.hpp"
#include "mixrecon/json_io.hpp"
#include "mixrecon/metrics.hpp"
#include "mixrecon/mixture_sim.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/reconstruct.hpp"
#include "mixrecon/rng.hpp"
#include "mixrecon/sequence_db.hpp"

namespace mixrecon {

// N distinct sequences with i.i.d. uniform bases; collisions are redrawn.
inline SequenceDatabase generate_random_db(std::size_t N, std::size_t length, std::uint64_t seed) {
  if (N < 1 || length < 1) throw InvalidArgument("random database needs N >= 1 and length >= 1");
  if (length < 32 && N > pow4(static_cast<int>(length))) {
    throw InvalidArgument("cannot draw " + std::to_string(N) + " distinct sequences of length " + std::to_string(length));
  }
  Rng rng(derive_seed(seed, 0x64625fULL));
  std::unordered_set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(N);
  std::string s(length, 'A');
  while (entries.size() < N) {
    for (auto& c : s) c = kAlphabet[rng.below(4)];
    if (!seen.insert(s).second) continue;
    entries.emplace_back("rand_" + std::to_string(entries.size() + 1), s);
  }
  return SequenceDatabase::from_records(entries);
}

// Random sequences with the given lengths (a size-matched control).
inline SequenceDatabase generate_random_db_like(const std::vector<std::size_t>& lengths, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x6c696b65ULL));
  std::unordered_set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::string s(lengths[i], 'A');
    for (int attempt = 0;; ++attempt) {
      for (auto& c : s) c = kAlphabet[rng.below(4)];
      if (seen.insert(s).second) break;
      if (attempt > 1000) throw InvalidArgument("cannot draw a distinct random sequence of length " + std::to_string(lengths[i]));
    }
    entries.emplace_back("rand_" + std::to_string(i + 1), s);
  }
  return SequenceDatabase::from_records(entries);
}

struct RandomDbSpec {
  std::size_t N = 2000;
  std::size_t length = 400;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::optional<std::string> fasta;  // when set, used instead of `random`
  RandomDbSpec random;
  int L = 100;
  std::size_t k = 20;
  double alpha = 1.0;
  std::vector<std::uint64_t> R_grid{10000, 100000, 500000};
  std::size_t trials = 20;
  DncParams dnc;
  double delta = 0.5;
  std::uint64_t seed = 1;
  int scan_L_lo = 1;
  int scan_L_hi = 12;
  bool random_control = true;
  std::string output_dir = ".";
  std::size_t workers = 0;

  void validate() const {
    if (R_grid.empty()) throw InvalidArgument("R grid is empty");
    for (std::size_t i = 0; i < R_grid.size(); ++i) {
      if (R_grid[i] < 1) throw InvalidArgument("R grid values must be positive");
      if (i > 0 && R_grid[i] <= R_grid[i - 1]) throw InvalidArgument("R grid must be strictly increasing");
    }
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    if (L < 1 || L > kMaxMatrixReadLength) throw InvalidArgument("read length out of range");
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be nonnegative");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (scan_L_lo < 1 || scan_L_hi < scan_L_lo) throw InvalidArgument("scan range is empty");
    if (!fasta && (random.N < 1 || random.length < 1)) throw InvalidArgument("random database needs N, length >= 1");
    dnc.validate();
  }

  // Fields that determine results; output_dir and workers are excluded.
  nlohmann::json to_json() const {
    nlohmann::json db = fasta ? nlohmann::json{{"fasta", *fasta}}
                              : nlohmann::json{{"random", {{"N", random.N}, {"length", random.length}, {"seed", random.seed}}}};
    return {{"db", db},
            {"L", L},
            {"k", k},
            {"alpha", alpha},
            {"R_grid", R_grid},
            {"trials", trials},
            {"dnc", mixrecon::to_json(dnc)},
            {"delta", delta},
            {"seed", seed},
            {"scan", {{"L_lo", scan_L_lo}, {"L_hi", scan_L_hi}, {"random_control", random_control}}}};
  }

  std::string hash() const { return detail::hex32(detail::crc32_of(to_json().dump())); }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
      if (j.contains("db")) {
        const auto& db = j.at("db");
        if (db.contains("fasta")) c.fasta = db.at("fasta").get<std::string>();
        if (db.contains("random")) {
          const auto& r = db.at("random");
          c.random.N = r.value("N", c.random.N);
          c.random.length = r.value("length", c.random.length);
          c.random.seed = r.value("seed", c.random.seed);
        }
      }
      c.L = j.value("L", c.L);
      c.k = j.value("k", c.k);
      c.alpha = j.value("alpha", c.alpha);
      c.R_grid = j.value("R_grid", c.R_grid);
      c.trials = j.value("trials", c.trials);
      if (j.contains("dnc")) update_from_json(c.dnc, j.at("dnc"));
      c.delta = j.value("delta", c.delta);
      c.seed = j.value("seed", c.seed);
      if (j.contains("scan")) {
        const auto& s = j.at("scan");
        c.scan_L_lo = s.value("L_lo", c.scan_L_lo);
        c.scan_L_hi = s.value("L_hi", c.scan_L_hi);
        c.random_control = s.value("random_control", c.random_control);
      }
      c.output_dir = j.value("output_dir", c.output_dir);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("bad experiment config: ") + e.what());
    }
    return c;
  }
};

inline SequenceDatabase experiment_database(const ExperimentConfig& cfg) {
  if (cfg.fasta) return parse_fasta(*cfg.fasta).database;
  return generate_random_db(cfg.random.N, cfg.random.length, cfg.random.seed);
}

namespace detail {

// Shortest text that round-trips the double; "inf"/"nan" for non-finite.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

struct TrialRow {
  std::uint64_t R = 0;
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  bool ok = false;
  std::string error;
  double l2_error = std::nan("");
  double mahalanobis_error = std::nan("");
  double l2_error_species = std::nan("");
  double l2_bound = std::nan("");
  double mahalanobis_bound = std::nan("");
  std::size_t true_support = 0;
  std::size_t estimated_support = 0;
  bool support_recovered = false;
  double unmapped_fraction = 0.0;
};

struct SummaryRow {
  std::uint64_t R = 0;
  std::size_t ok_trials = 0;
  std::size_t failed_trials = 0;
  double l2_mean = 0.0, l2_sd = 0.0;
  double mahalanobis_mean = 0.0, mahalanobis_sd = 0.0;
  double l2_species_mean = 0.0, l2_species_sd = 0.0;
  double l2_bound = 0.0;
  double mahalanobis_bound = 0.0;
  double fraction_mahalanobis_within_bound = 0.0;
  double fraction_support_recovered = 0.0;
};

struct ErrorVsReadsResult {
  std::string config_hash;
  std::optional<double> lambda_min;
  std::vector<TrialRow> trials;      // sorted by (R, trial)
  std::vector<SummaryRow> summary;   // one per R

  std::size_t failed_trials() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const TrialRow& t) { return !t.ok; }));
  }

  std::string trials_csv() const {
    std::string out =
        "R,trial,trial_seed,config_hash,status,l2_error,mahalanobis_error,l2_error_species,l2_bound,"
        "mahalanobis_bound,true_support,estimated_support,support_recovered,unmapped_fraction,error\n";
    for (const auto& t : trials) {
      out += std::to_string(t.R) + "," + std::to_string(t.trial) + "," + std::to_string(t.trial_seed) + "," + config_hash +
             "," + (t.ok ? "ok" : "failed") + "," + detail::fmt_double(t.l2_error) + "," +
             detail::fmt_double(t.mahalanobis_error) + "," + detail::fmt_double(t.l2_error_species) + "," +
             detail::fmt_double(t.l2_bound) + "," + detail::fmt_double(t.mahalanobis_bound) + "," +
             std::to_string(t.true_support) + "," + std::to_string(t.estimated_support) + "," +
             (t.support_recovered ? "1" : "0") + "," + detail::fmt_double(t.unmapped_fraction) + ",\"" + t.error + "\"\n";
    }
    return out;
  }

  std::string summary_csv() const {
    std::string out =
        "R,config_hash,ok_trials,failed_trials,l2_mean,l2_sd,mahalanobis_mean,mahalanobis_sd,l2_species_mean,"
        "l2_species_sd,l2_bound,mahalanobis_bound,fraction_mahalanobis_within_bound,fraction_support_recovered\n";
    for (const auto& s : summary) {
      out += std::to_string(s.R) + "," + config_hash + "," + std::to_string(s.ok_trials) + "," +
             std::to_string(s.failed_trials) + "," + detail::fmt_double(s.l2_mean) + "," + detail::fmt_double(s.l2_sd) +
             "," + detail::fmt_double(s.mahalanobis_mean) + "," + detail::fmt_double(s.mahalanobis_sd) + "," +
             detail::fmt_double(s.l2_species_mean) + "," + detail::fmt_double(s.l2_species_sd) + "," +
             detail::fmt_double(s.l2_bound) + "," + detail::fmt_double(s.mahalanobis_bound) + "," +
             detail::fmt_double(s.fraction_mahalanobis_within_bound) + "," +
             detail::fmt_double(s.fraction_support_recovered) + "\n";
    }
    return out;
  }

  nlohmann::json summary_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : summary) {
      rows.push_back({{"R", s.R},
                      {"ok_trials", s.ok_trials},
                      {"failed_trials", s.failed_trials},
                      {"l2_mean", finite_or_null(s.l2_mean)},
                      {"l2_sd", finite_or_null(s.l2_sd)},
                      {"mahalanobis_mean", finite_or_null(s.mahalanobis_mean)},
                      {"mahalanobis_sd", finite_or_null(s.mahalanobis_sd)},
                      {"l2_species_mean", finite_or_null(s.l2_species_mean)},
                      {"l2_bound", finite_or_null(s.l2_bound)},
                      {"mahalanobis_bound", finite_or_null(s.mahalanobis_bound)},
                      {"fraction_mahalanobis_within_bound", s.fraction_mahalanobis_within_bound},
                      {"fraction_support_recovered", s.fraction_support_recovered}});
    }
    return {{"config_hash", config_hash},
            {"lambda_min", lambda_min ? nlohmann::json(*lambda_min) : nlohmann::json(nullptr)},
            {"failed_trials", failed_trials()},
            {"summary", rows}};
  }
};

// Error of the divide-and-conquer estimate against the planted mixture as a
// function of the number of reads, alongside both finite-sample bounds.
inline ErrorVsReadsResult run_error_vs_reads(const ExperimentConfig& cfg, const SequenceDatabase& db) {
  cfg.validate();
  const auto A = build_matrix(db, cfg.L, cfg.workers);
  ErrorVsReadsResult result;
  result.config_hash = cfg.hash();
  try {
    result.lambda_min = lambda_min(A, {5000, cfg.workers});
  } catch (const CapacityError&) {
    result.lambda_min.reset();
  }

  const std::size_t per_R = cfg.trials;
  result.trials.resize(cfg.R_grid.size() * per_R);
  parallel_for(result.trials.size(), cfg.workers, [&](std::size_t idx) {
    const std::size_t ri = idx / per_R;
    const std::size_t t = idx % per_R;
    TrialRow& row = result.trials[idx];
    row.R = cfg.R_grid[ri];
    row.trial = t;
    row.trial_seed = derive_seed(cfg.seed, ri, t);
    try {
      const auto mixture = sample_power_law_mixture(db, cfg.k, cfg.alpha, derive_seed(row.trial_seed, 1));
      const auto truth = mixture.full();
      const auto reads = simulate_reads(A, truth, row.R, derive_seed(row.trial_seed, 2), 1);
      const auto emp = empirical_frequencies(reads, A);
      DncParams params = cfg.dnc;
      params.seed = derive_seed(row.trial_seed, 3);
      params.workers = 1;
      const auto rep = divide_and_conquer(A, emp.y, params);
      if (rep.support.empty()) throw Error("reconstruction returned an empty support");
      const auto estimate = unweight_from_dna(rep.x_hat, A.col_lengths());
      const auto ev = evaluate(truth, estimate, A, row.R, cfg.delta, result.lambda_min);
      row.l2_error = ev.l2_error;
      row.mahalanobis_error = ev.mahalanobis_error;
      row.l2_error_species = ev.l2_error_species;
      row.l2_bound = ev.l2_bound;
      row.mahalanobis_bound = ev.mahalanobis_bound;
      row.true_support = mixture.support.size();
      row.estimated_support = rep.support.size();
      std::vector<int> truth_support = mixture.support;
      std::sort(truth_support.begin(), truth_support.end());
      row.support_recovered = truth_support == rep.support;
      row.unmapped_fraction = emp.unmapped_fraction;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      std::replace(row.error.begin(), row.error.end(), '"', '\'');
    }
  });

  for (std::size_t ri = 0; ri < cfg.R_grid.size(); ++ri) {
    SummaryRow s;
    s.R = cfg.R_grid[ri];
    s.mahalanobis_bound = mahalanobis_error_bound(s.R, cfg.delta);
    s.l2_bound = result.lambda_min ? l2_error_bound(s.R, cfg.delta, *result.lambda_min) : std::nan("");
    std::vector<double> l2, ma, l2s;
    std::size_t within = 0, recovered = 0;
    for (std::size_t t = 0; t < per_R; ++t) {
      const auto& row = result.trials[ri * per_R + t];
      if (!row.ok) {
        ++s.failed_trials;
        continue;
      }
      ++s.ok_trials;
      l2.push_back(row.l2_error);
      ma.push_back(row.mahalanobis_error);
      l2s.push_back(row.l2_error_species);
      if (row.mahalanobis_error <= row.mahalanobis_bound) ++within;
      if (row.support_recovered) ++recovered;
    }
    s.l2_mean = detail::mean_of(l2);
    s.l2_sd = detail::sd_of(l2);
    s.mahalanobis_mean = detail::mean_of(ma);
    s.mahalanobis_sd = detail::sd_of(ma);
    s.l2_species_mean = detail::mean_of(l2s);
    s.l2_species_sd = detail::sd_of(l2s);
    const double ok = static_cast<double>(std::max<std::size_t>(s.ok_trials, 1));
    s.fraction_mahalanobis_within_bound = static_cast<double>(within) / ok;
    s.fraction_support_recovered = static_cast<double>(recovered) / ok;
    result.summary.push_back(s);
  }
  return result;
}

inline ErrorVsReadsResult run_error_vs_reads(const ExperimentConfig& cfg) {
  return run_error_vs_reads(cfg, experiment_database(cfg));
}

struct IdentScanResult {
  std::string config_hash;
  ScanReport configured;
  std::optional<ScanReport> random_control;
  std::size_t N = 0;

  std::string csv() const {
    std::string out = "database,L,N,K,rank,partially_identifiable,fraction_partial,identifiable,approximate,config_hash\n";
    auto emit = [&](const char* name, const ScanReport& r) {
      for (const auto& p : r.points) {
        out += std::string(name) + "," + std::to_string(p.L) + "," + std::to_string(N) + "," + std::to_string(p.rows) + "," +
               std::to_string(p.rank) + "," + std::to_string(p.partially_identifiable) + "," +
               detail::fmt_double(p.fraction_partial) + "," + (p.identifiable ? "1" : "0") + "," +
               (p.approximate ? "1" : "0") + "," + config_hash + "\n";
      }
    };
    emit("configured", configured);
    if (random_control) emit("random_control", *random_control);
    return out;
  }

  nlohmann::json summary_json() const {
    return {{"config_hash", config_hash},
            {"N", N},
            {"configured", to_json(configured)},
            {"random_control", random_control ? to_json(*random_control) : nlohmann::json(nullptr)}};
  }
};

// Fraction of partially identifiable species per read length for the
// configured database and, optionally, a length-matched random control.
inline IdentScanResult run_identifiability_scan(const ExperimentConfig& cfg, const SequenceDatabase& db) {
  cfg.validate();
  IdentifiabilityOptions opt;
  opt.workers = cfg.workers;
  IdentScanResult out;
  out.config_hash = cfg.hash();
  out.N = db.size();
  out.configured = critical_read_length_scan(db, cfg.scan_L_lo, cfg.scan_L_hi, opt);
  if (cfg.random_control) {
    const auto control = generate_random_db_like(db.lengths(), derive_seed(cfg.seed, 0x7363616eULL));
    out.random_control = critical_read_length_scan(control, cfg.scan_L_lo, cfg.scan_L_hi, opt);
  }
  return out;
}

inline IdentScanResult run_identifiability_scan(const ExperimentConfig& cfg) {
  return run_identifiability_scan(cfg, experiment_database(cfg));
}

}  // namespace mixrecon
