// mixrecon command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mixrecon/mixrecon.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mixrecon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitPartial = 3;

std::size_t workers_from(int flag) { return flag > 0 ? static_cast<std::size_t>(flag) : default_workers(); }

json read_json(const fs::path& path) {
  try {
    return json::parse(detail::read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { detail::write_text_file(path, j.dump(2) + "\n"); }

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw InvalidArgument("bad range '" + text + "', expected lo:hi");
  }
}

SequenceDatabase load_db(const fs::path& path) {
  auto parsed = parse_fasta(path);
  if (parsed.dropped_ambiguous > 0) {
    std::cerr << "note: dropped " << parsed.dropped_ambiguous << " record(s) with non-ACGT characters\n";
  }
  if (parsed.duplicates_collapsed > 0) {
    std::cerr << "note: collapsed " << parsed.duplicates_collapsed << " duplicate sequence(s)\n";
  }
  return std::move(parsed.database);
}

// Frequency vector from a truth file, a reconstruct report, or a bare vector.
FrequencyVector estimate_from_json(const json& j) {
  if (j.contains("x_hat")) return frequency_from_json(j.at("x_hat"));
  return truth_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Species mixture reconstruction from short-read frequencies"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, std::string("Worker threads (default: $") + kThreadsEnv + " or hardware)");

  // build-matrix
  auto* build = app.add_subcommand("build-matrix", "Build the read-sampling matrix of a database");
  std::string build_db, build_out;
  int build_L = 0;
  std::uint64_t build_seed = 0;
  build->add_option("--db", build_db, "FASTA database (plain or gzip)")->required();
  build->add_option("--read-len,-L", build_L, "Read length L")->required();
  build->add_option("--out", build_out, "Output matrix file")->required();
  build->add_option("--seed", build_seed, "Unused; accepted for uniformity");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample reads from a mixture");
  std::string sim_matrix, sim_truth_in, sim_reads_out, sim_truth_out;
  std::size_t sim_k = 0;
  double sim_alpha = 1.0;
  std::uint64_t sim_R = 0, sim_seed = 1;
  sim->add_option("--matrix", sim_matrix, "Matrix file")->required();
  sim->add_option("--truth", sim_truth_in, "Mixture/frequency JSON to sample from");
  sim->add_option("--k", sim_k, "Draw a power-law mixture with k species");
  sim->add_option("--alpha", sim_alpha, "Power-law exponent");
  sim->add_option("--reads-count,-R", sim_R, "Number of reads")->required();
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_reads_out, "Read-count TSV output")->required();
  sim->add_option("--truth-out", sim_truth_out, "Write the sampled mixture here");

  // identifiability
  auto* ident = app.add_subcommand("identifiability", "Identifiability scan over read lengths");
  std::string ident_db, ident_range = "1:12", ident_out;
  int ident_L = 0;
  double ident_tol = 1e-10;
  std::size_t ident_cap = 5000;
  std::uint64_t ident_seed = IdentifiabilityOptions{}.sketch_seed;
  ident->add_option("--db", ident_db, "FASTA database")->required();
  ident->add_option("--L-range", ident_range, "Read lengths lo:hi");
  ident->add_option("--L", ident_L, "Read length for per-species flags (default: top of range)");
  ident->add_option("--tol", ident_tol, "Relative rank tolerance");
  ident->add_option("--dense-cap", ident_cap, "Largest component analysed exactly");
  ident->add_option("--seed", ident_seed, "Seed for sketched components");
  ident->add_option("--out", ident_out, "Report JSON")->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Divide-and-conquer reconstruction");
  std::string rec_matrix, rec_reads, rec_out, rec_rule = "retain_ambiguous";
  bool rec_raw = false;
  DncParams rec_params;
  rec->add_option("--matrix", rec_matrix, "Matrix file")->required();
  rec->add_option("--reads", rec_reads, "Read-count TSV (or raw reads with --raw)")->required();
  rec->add_flag("--raw", rec_raw, "Reads are FASTQ/FASTA/plain lines");
  rec->add_option("--block-size", rec_params.block_size, "Block size B");
  rec->add_option("--tau", rec_params.tau, "Per-block threshold");
  rec->add_option("--kf", rec_params.final_cap, "Final candidate cap");
  rec->add_option("--schedule", rec_params.schedule, "Partitions per iteration");
  rec->add_option("--max-iterations", rec_params.max_iterations, "Iteration limit");
  rec->add_option("--ambiguity", rec_rule, "retain_ambiguous | literal_orthogonal")
      ->check(CLI::IsMember({"retain_ambiguous", "literal_orthogonal"}));
  rec->add_option("--seed", rec_params.seed, "Seed");
  rec->add_option("--out", rec_out, "Report JSON")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare an estimate with the truth");
  std::string eval_truth, eval_estimate, eval_matrix, eval_out;
  std::uint64_t eval_R = 0, eval_seed = 0;
  double eval_delta = 0.5;
  bool eval_lambda = false;
  eval->add_option("--truth", eval_truth, "Truth JSON")->required();
  eval->add_option("--estimate", eval_estimate, "Reconstruct report or frequency JSON")->required();
  eval->add_option("--matrix", eval_matrix, "Matrix file")->required();
  eval->add_option("--reads-count,-R", eval_R, "Number of reads")->required();
  eval->add_option("--delta", eval_delta, "Failure probability");
  eval->add_flag("--lambda", eval_lambda, "Compute lambda_min for the l2 bound");
  eval->add_option("--seed", eval_seed, "Unused; accepted for uniformity");
  eval->add_option("--out", eval_out, "Output JSON")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Experiment pipelines");
  exp->require_subcommand(1);
  std::string exp_config, exp_out, exp_fasta;
  std::optional<std::uint64_t> exp_seed;
  std::optional<int> exp_L;
  std::optional<std::size_t> exp_trials, exp_k, exp_N, exp_length;
  std::vector<std::uint64_t> exp_R;
  std::string exp_range;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", exp_config, "Config JSON");
    sub->add_option("--out", exp_out, "Output directory (overrides config)");
    sub->add_option("--seed", exp_seed, "Master seed");
    sub->add_option("--fasta", exp_fasta, "Database FASTA (overrides random db)");
    sub->add_option("--N", exp_N, "Random db size");
    sub->add_option("--length", exp_length, "Random db sequence length");
  };
  auto* exp_err = exp->add_subcommand("error-vs-reads", "Error as a function of the number of reads");
  add_common(exp_err);
  exp_err->add_option("--L", exp_L, "Read length");
  exp_err->add_option("--k", exp_k, "Species per mixture");
  exp_err->add_option("--trials", exp_trials, "Trials per R");
  exp_err->add_option("--R", exp_R, "Read-count grid, comma separated")->delimiter(',');
  auto* exp_scan = exp->add_subcommand("ident-scan", "Identifiable fraction as a function of L");
  add_common(exp_scan);
  exp_scan->add_option("--L-range", exp_range, "Read lengths lo:hi");

  // random-db
  auto* rdb = app.add_subcommand("random-db", "Write a random i.i.d. database");
  std::size_t rdb_N = 0, rdb_length = 0;
  std::uint64_t rdb_seed = 1;
  std::string rdb_out;
  rdb->add_option("--N", rdb_N, "Number of sequences")->required();
  rdb->add_option("--length", rdb_length, "Sequence length")->required();
  rdb->add_option("--seed", rdb_seed, "Seed");
  rdb->add_option("--out", rdb_out, "FASTA output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  const std::size_t workers = workers_from(threads);
  try {
    if (*build) {
      const auto db = load_db(build_db);
      const auto A = build_matrix(db, build_L, workers);
      save_matrix(A, build_out);
      json manifest = matrix_header(A);
      manifest["labels"] = db.labels();
      manifest["database_checksum"] = database_checksum(db);
      write_json(build_out + ".json", manifest);
      std::cerr << "K=" << A.rows() << " N=" << A.cols() << " nnz=" << A.nonzeros() << "\n";
    } else if (*sim) {
      const auto A = load_matrix(sim_matrix);
      MixtureSpec mixture;
      FrequencyVector truth;
      if (!sim_truth_in.empty()) {
        truth = truth_from_json(read_json(sim_truth_in));
      } else if (sim_k > 0) {
        mixture = sample_power_law_mixture(A.cols(), sim_k, sim_alpha, sim_seed);
        truth = mixture.full();
      } else {
        throw InvalidArgument("simulate needs --truth or --k");
      }
      if (static_cast<std::size_t>(truth.values.size()) != A.cols()) {
        throw InvalidArgument("truth has " + std::to_string(truth.values.size()) + " entries but the matrix has " +
                              std::to_string(A.cols()) + " columns");
      }
      const auto reads = simulate_reads(A, truth, sim_R, derive_seed(sim_seed, 2), workers);
      save_read_counts(reads, sim_reads_out);
      if (!sim_truth_out.empty()) {
        write_json(sim_truth_out, sim_k > 0 && sim_truth_in.empty() ? to_json(mixture) : json{{"x", to_json(truth)}});
      }
    } else if (*ident) {
      const auto [lo, hi] = parse_range(ident_range);
      const auto db = load_db(ident_db);
      IdentifiabilityOptions opt;
      opt.tol = ident_tol;
      opt.dense_cap = ident_cap;
      opt.sketch_seed = ident_seed;
      opt.workers = workers;
      const auto scan = critical_read_length_scan(db, lo, hi, opt);
      const int flag_L = ident_L > 0 ? ident_L : hi;
      const auto A = build_matrix(db, flag_L, workers);
      const auto report = analyze_identifiability(A, opt, true);
      json out = to_json(scan);
      out["N"] = db.size();
      out["flags_at"] = {{"L", flag_L}, {"report", to_json(report)}, {"labels", db.labels()}};
      write_json(ident_out, out);
      for (const auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
      if (!scan.violations.empty()) {
        for (const auto& v : scan.violations) std::cerr << "error: " << v << "\n";
        return kExitFailure;
      }
    } else if (*rec) {
      const auto A = load_matrix(rec_matrix);
      ReadCounts reads;
      if (rec_raw) {
        auto raw = load_raw_reads(rec_reads, A.read_length());
        if (raw.skipped > 0) std::cerr << "note: skipped " << raw.skipped << " unusable read(s)\n";
        reads = std::move(raw.counts);
      } else {
        reads = load_read_counts(rec_reads);
      }
      const auto emp = empirical_frequencies(reads, A);
      if (emp.unmapped_reads > 0) {
        std::cerr << "note: " << emp.unmapped_reads << " read(s) match no database k-mer (fraction "
                  << emp.unmapped_fraction << ")\n";
      }
      rec_params.ambiguity =
          rec_rule == "literal_orthogonal" ? AmbiguityRule::literal_orthogonal : AmbiguityRule::retain_ambiguous;
      rec_params.workers = workers;
      const auto report = divide_and_conquer(A, emp.y, rec_params);
      json out = to_json(report);
      out["x_hat"] = to_json(unweight_from_dna(report.x_hat, A.col_lengths()));
      out["reads"] = {{"total", emp.total}, {"mapped", emp.mapped_reads}, {"unmapped", emp.unmapped_reads}};
      write_json(rec_out, out);
    } else if (*eval) {
      const auto A = load_matrix(eval_matrix);
      const auto truth = truth_from_json(read_json(eval_truth));
      const auto estimate = estimate_from_json(read_json(eval_estimate));
      std::optional<double> lambda;
      if (eval_lambda) lambda = lambda_min(A, {5000, workers});
      write_json(eval_out, to_json(evaluate(truth, estimate, A, eval_R, eval_delta, lambda)));
    } else if (*exp) {
      ExperimentConfig cfg;
      if (!exp_config.empty()) cfg = ExperimentConfig::from_json(read_json(exp_config));
      if (!exp_out.empty()) cfg.output_dir = exp_out;
      if (exp_seed) cfg.seed = *exp_seed;
      if (!exp_fasta.empty()) cfg.fasta = exp_fasta;
      if (exp_N) cfg.random.N = *exp_N;
      if (exp_length) cfg.random.length = *exp_length;
      cfg.workers = workers;
      const fs::path dir = cfg.output_dir;
      fs::create_directories(dir);
      if (*exp_err) {
        if (exp_L) cfg.L = *exp_L;
        if (exp_k) cfg.k = *exp_k;
        if (exp_trials) cfg.trials = *exp_trials;
        if (!exp_R.empty()) cfg.R_grid = exp_R;
        cfg.validate();
        const auto result = run_error_vs_reads(cfg);
        detail::write_text_file(dir / "error_vs_reads_trials.csv", result.trials_csv());
        detail::write_text_file(dir / "error_vs_reads_summary.csv", result.summary_csv());
        json summary = result.summary_json();
        summary["config"] = cfg.to_json();
        write_json(dir / "error_vs_reads_summary.json", summary);
        if (result.failed_trials() > 0) {
          std::cerr << result.failed_trials() << " trial(s) failed; see the trials CSV\n";
          return kExitPartial;
        }
      } else {
        if (!exp_range.empty()) std::tie(cfg.scan_L_lo, cfg.scan_L_hi) = parse_range(exp_range);
        cfg.validate();
        const auto result = run_identifiability_scan(cfg);
        detail::write_text_file(dir / "ident_scan.csv", result.csv());
        json summary = result.summary_json();
        summary["config"] = cfg.to_json();
        write_json(dir / "ident_scan_summary.json", summary);
      }
    } else if (*rdb) {
      save_database(generate_random_db(rdb_N, rdb_length, rdb_seed), rdb_out);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
