#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixrecon/error.hpp"
#include "mixrecon/kmer.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/rng.hpp"

namespace mixrecon {

struct MixtureSpec {
  std::size_t num_species = 0;       // N of the database the mixture lives on
  std::vector<int> support;          // distinct 1-based ids
  Eigen::VectorXd frequencies;       // normalized, aligned with `support`
  std::uint64_t seed = 0;
  std::string generator_tag;

  // Full length-N species frequency vector.
  FrequencyVector full() const {
    FrequencyVector x{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_species)), FrequencyKind::species, true};
    for (std::size_t i = 0; i < support.size(); ++i) {
      x.values[support[i] - 1] = frequencies[static_cast<Eigen::Index>(i)];
    }
    return x;
  }

  friend bool operator==(const MixtureSpec& a, const MixtureSpec& b) {
    return a.num_species == b.num_species && a.support == b.support && a.frequencies == b.frequencies &&
           a.seed == b.seed && a.generator_tag == b.generator_tag;
  }
};

// Observed reads aggregated by k-mer, in lexicographic order.
struct ReadCounts {
  int read_length = 0;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t seed = 0;

  std::size_t distinct() const { return counts.size(); }

  void add(const std::string& kmer, std::uint64_t n = 1) {
    if (n == 0) return;
    counts[kmer] += n;
    total += n;
  }

  friend bool operator==(const ReadCounts&, const ReadCounts&) = default;
};

// k species drawn uniformly without replacement; the i-th drawn species gets
// weight i^-alpha before normalization.
inline MixtureSpec sample_power_law_mixture(std::size_t num_species, std::size_t k, double alpha, std::uint64_t seed) {
  if (k < 1 || k > num_species) {
    throw InvalidArgument("mixture size k=" + std::to_string(k) + " must be in [1, N=" +
                          std::to_string(num_species) + "]");
  }
  if (!(alpha >= 0.0)) throw InvalidArgument("power-law exponent must be nonnegative");
  Rng rng(derive_seed(seed, 0x6d6978ULL));
  std::vector<int> ids(num_species);
  for (std::size_t i = 0; i < num_species; ++i) ids[i] = static_cast<int>(i) + 1;
  // Partial Fisher-Yates: the first k slots become a uniform k-subset in draw order.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(num_species - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) w[static_cast<Eigen::Index>(i)] = std::pow(static_cast<double>(i + 1), -alpha);
  w /= w.sum();
  std::ostringstream tag;
  tag << "power_law_rank(alpha=" << alpha << ",k=" << k << ")";
  return {num_species, std::move(ids), std::move(w), seed, tag.str()};
}

inline MixtureSpec sample_power_law_mixture(const SequenceDatabase& db, std::size_t k, double alpha, std::uint64_t seed) {
  return sample_power_law_mixture(db.size(), k, alpha, seed);
}

// Reads per independently seeded shard. Fixed, so counts do not depend on the
// number of workers.
inline constexpr std::uint64_t kReadShardSize = 1U << 16;

// R i.i.d. reads: species b ~ x' (DNA-weighted x), then a read from column b.
inline ReadCounts simulate_reads(const ReadSamplingMatrix& A, const FrequencyVector& x, std::uint64_t R,
                                 std::uint64_t seed, std::size_t workers = 0) {
  if (R == 0) throw InvalidArgument("number of reads R must be at least 1");
  if (x.size() != A.cols()) {
    throw InvalidArgument("frequency vector has " + std::to_string(x.size()) + " entries, matrix has " +
                          std::to_string(A.cols()) + " columns");
  }
  if (!x.normalized) throw InvalidArgument("simulate_reads expects a normalized frequency vector");
  const FrequencyVector x_prime = reweight_to_dna(x, A.col_lengths());

  // Inversion tables: species CDF over the support, per-column CDFs over nonzeros.
  std::vector<Eigen::Index> species;
  std::vector<double> species_cdf;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x_prime.values.size(); ++j) {
    if (x_prime.values[j] > 0.0) {
      acc += x_prime.values[j];
      species.push_back(j);
      species_cdf.push_back(acc);
    }
  }
  const SparseMat& M = A.entries();
  std::vector<std::vector<double>> col_cdf(species.size());
  std::vector<std::vector<std::uint32_t>> col_rows(species.size());
  for (std::size_t s = 0; s < species.size(); ++s) {
    double c = 0.0;
    for (SparseMat::InnerIterator it(M, species[s]); it; ++it) {
      c += it.value();
      col_cdf[s].push_back(c);
      col_rows[s].push_back(static_cast<std::uint32_t>(it.row()));
    }
  }

  std::vector<std::uint32_t> drawn(R);
  const std::uint64_t shards = (R + kReadShardSize - 1) / kReadShardSize;
  parallel_for(static_cast<std::size_t>(shards), workers, [&](std::size_t shard) {
    Rng rng(derive_seed(seed, shard));
    const std::uint64_t begin = shard * kReadShardSize;
    const std::uint64_t end = std::min<std::uint64_t>(R, begin + kReadShardSize);
    for (std::uint64_t r = begin; r < end; ++r) {
      const double u = rng.uniform() * species_cdf.back();
      auto s = static_cast<std::size_t>(std::upper_bound(species_cdf.begin(), species_cdf.end(), u) - species_cdf.begin());
      s = std::min(s, species.size() - 1);
      const auto& cdf = col_cdf[s];
      const double v = rng.uniform() * cdf.back();
      auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
      k = std::min(k, cdf.size() - 1);
      drawn[r] = col_rows[s][k];
    }
  });

  std::vector<std::uint64_t> per_row(A.rows(), 0);
  for (auto row : drawn) ++per_row[row];
  ReadCounts rc;
  rc.read_length = A.read_length();
  rc.seed = seed;
  for (std::size_t i = 0; i < per_row.size(); ++i) {
    if (per_row[i] > 0) rc.add(A.row_kmer(i), per_row[i]);
  }
  return rc;
}

// y over the compact rows of A. Reads whose k-mer is not a row are counted in
// `unmapped_reads` and left out of y; y is not renormalized.
struct EmpiricalFrequencies {
  SparseVec y;
  std::uint64_t total = 0;
  std::uint64_t mapped_reads = 0;
  std::uint64_t unmapped_reads = 0;
  double unmapped_fraction = 0.0;
};

inline EmpiricalFrequencies empirical_frequencies(const ReadCounts& rc, const ReadSamplingMatrix& A) {
  if (rc.total == 0) throw InvalidArgument("read counts are empty");
  if (rc.read_length != A.read_length()) {
    throw InvalidArgument("reads have length " + std::to_string(rc.read_length) + " but matrix was built for L=" +
                          std::to_string(A.read_length()));
  }
  EmpiricalFrequencies out;
  out.total = rc.total;
  out.y.resize(static_cast<Eigen::Index>(A.rows()));
  const double R = static_cast<double>(rc.total);
  // rc.counts and the rows of A share lexicographic order, so insertBack works.
  for (const auto& [kmer, count] : rc.counts) {
    if (auto row = A.row_of(kmer)) {
      out.y.insertBack(static_cast<Eigen::Index>(*row)) = static_cast<double>(count) / R;
      out.mapped_reads += count;
    } else {
      out.unmapped_reads += count;
    }
  }
  out.unmapped_fraction = static_cast<double>(out.unmapped_reads) / R;
  return out;
}

// ---------------------------------------------------------------------------
// Text format:
//   #{"L":..,"R":..,"seed":..}
//   <kmer>\t<count>
// ---------------------------------------------------------------------------

inline std::string format_read_counts(const ReadCounts& rc) {
  std::string out = "#" + nlohmann::json{{"L", rc.read_length}, {"R", rc.total}, {"seed", rc.seed}}.dump() + "\n";
  for (const auto& [kmer, count] : rc.counts) {
    out += kmer;
    out += '\t';
    out += std::to_string(count);
    out += '\n';
  }
  return out;
}

inline ReadCounts parse_read_counts(std::string_view text) {
  ReadCounts rc;
  std::uint64_t declared_total = 0;
  bool has_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line_no != 1) continue;
      try {
        const auto header = nlohmann::json::parse(line.substr(1));
        rc.read_length = header.at("L").get<int>();
        declared_total = header.at("R").get<std::uint64_t>();
        rc.seed = header.value("seed", std::uint64_t{0});
        has_header = true;
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad read-count header: ") + e.what());
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("line " + std::to_string(line_no) + ": expected kmer<TAB>count");
    const std::string_view kmer = line.substr(0, tab);
    const std::string count_text(detail::trim(line.substr(tab + 1)));
    if (rc.read_length == 0) rc.read_length = static_cast<int>(kmer.size());
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(count_text, &used);
      if (used != count_text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line_no) + ": bad count '" + count_text + "'");
    }
    if (count == 0) throw FormatError("line " + std::to_string(line_no) + ": counts must be positive");
    try {
      if (kmer.size() != static_cast<std::size_t>(rc.read_length)) {
        throw InvalidArgument("k-mer length " + std::to_string(kmer.size()) + " differs from L=" +
                              std::to_string(rc.read_length));
      }
      std::string upper(kmer);
      for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      for (char c : upper) {
        if (nucleotide_digit(c) < 0) throw InvalidArgument(std::string("invalid nucleotide '") + c + "'");
      }
      rc.add(upper, count);
    } catch (const InvalidArgument& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (has_header && declared_total != rc.total) {
    throw FormatError("read-count header declares R=" + std::to_string(declared_total) + " but counts sum to " +
                      std::to_string(rc.total));
  }
  return rc;
}

inline void save_read_counts(const ReadCounts& rc, const std::filesystem::path& path) {
  detail::write_text_file(path, format_read_counts(rc));
}

inline ReadCounts load_read_counts(const std::filesystem::path& path) {
  return parse_read_counts(detail::read_text_file(path));
}

struct RawReadLoad {
  ReadCounts counts;
  std::uint64_t skipped = 0;  // shorter than L or non-ACGT in the first L bases
};

// Raw reads: FASTQ, FASTA, or one read per line. Each read contributes its
// first L bases.
inline RawReadLoad parse_raw_reads(std::string_view text, int L) {
  if (L < 1 || L > kMaxMatrixReadLength) throw InvalidArgument("read length L=" + std::to_string(L) + " out of range");
  RawReadLoad out;
  out.counts.read_length = L;
  auto take = [&](std::string_view read) {
    if (read.size() < static_cast<std::size_t>(L)) {
      ++out.skipped;
      return;
    }
    std::string prefix(read.substr(0, static_cast<std::size_t>(L)));
    for (auto& c : prefix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!std::all_of(prefix.begin(), prefix.end(), [](char c) { return nucleotide_digit(c) >= 0; })) {
      ++out.skipped;
      return;
    }
    out.counts.add(prefix);
  };
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    lines.push_back(detail::trim(text.substr(0, eol)));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
  }
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  if (first == lines.size()) return out;
  if (lines[first].front() == '@') {
    // FASTQ: header, sequence, '+', quality.
    for (std::size_t i = first; i < lines.size();) {
      if (lines[i].empty()) {
        ++i;
        continue;
      }
      if (lines[i].front() != '@' || i + 1 >= lines.size()) throw FormatError("malformed FASTQ record");
      take(lines[i + 1]);
      i += 4;
    }
  } else if (lines[first].front() == '>') {
    std::string current;
    bool open = false;
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (!lines[i].empty() && lines[i].front() == '>') {
        if (open) take(current);
        current.clear();
        open = true;
      } else {
        current += lines[i];
      }
    }
    if (open) take(current);
  } else {
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (!lines[i].empty()) take(lines[i]);
    }
  }
  return out;
}

inline RawReadLoad load_raw_reads(const std::filesystem::path& path, int L) {
  return parse_raw_reads(detail::read_text_file(path), L);
}

}  // namespace mixrecon
