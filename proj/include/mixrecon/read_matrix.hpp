#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iterator>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mixrecon/error.hpp"
#include "mixrecon/kmer.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/sequence_db.hpp"

namespace mixrecon {

using SparseMat = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;
using SparseVec = Eigen::SparseVector<double, Eigen::ColMajor, std::int64_t>;

// Species frequencies x, or the DNA-weighted sampling frequencies x' = x*n/<x,n>.
enum class FrequencyKind { species, dna_weighted };

inline constexpr double kSimplexTolerance = 1e-12;

struct FrequencyVector {
  Eigen::VectorXd values;
  FrequencyKind kind = FrequencyKind::species;
  bool normalized = false;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

inline void check_frequency_vector(const FrequencyVector& x) {
  if ((x.values.array() < 0.0).any()) throw InvalidArgument("frequency vector has negative entries");
  if (x.normalized && std::abs(x.values.sum() - 1.0) > kSimplexTolerance * std::max<double>(1.0, x.values.size())) {
    throw InvalidArgument("frequency vector flagged normalized but sums to " + std::to_string(x.values.sum()));
  }
}

// Reads longer than the sequence take a uniform tail; at most this many tail
// rows are generated for a single short column.
inline constexpr int kMaxTailExponent = 10;

// Read lengths the matrix supports (integer KmerCode stops at kMaxReadLength).
inline constexpr int kMaxMatrixReadLength = 1024;

inline constexpr double kColumnSumTolerance = 1e-12;

// Packed k-mer keys: two bits per base in 64-bit words, first base most
// significant; the last word holds the remaining bases right-aligned. Word-wise
// comparison is lexicographic order, and for L <= 32 the single word is the
// 0-based lexicographic code.
inline std::size_t key_words(int L) { return static_cast<std::size_t>((L + 31) / 32); }

inline void pack_kmer(std::string_view s, std::span<std::uint64_t> out) {
  const std::size_t W = out.size();
  for (std::size_t k = 0; k < W; ++k) {
    std::uint64_t w = 0;
    const std::size_t end = std::min(s.size(), 32 * (k + 1));
    for (std::size_t i = 32 * k; i < end; ++i) {
      const int d = nucleotide_digit(s[i]);
      if (d < 0) throw InvalidArgument(std::string("invalid nucleotide '") + s[i] + "'");
      w = (w << 2) | static_cast<std::uint64_t>(d);
    }
    out[k] = w;
  }
}

inline std::vector<std::uint64_t> pack_kmer(std::string_view s) {
  std::vector<std::uint64_t> key(key_words(static_cast<int>(s.size())));
  pack_kmer(s, key);
  return key;
}

inline std::string unpack_kmer(std::span<const std::uint64_t> key, int L) {
  std::string s(static_cast<std::size_t>(L), 'A');
  for (std::size_t k = 0; k < key.size(); ++k) {
    const std::size_t first = 32 * k;
    const std::size_t count = std::min<std::size_t>(32, static_cast<std::size_t>(L) - first);
    for (std::size_t b = 0; b < count; ++b) s[first + b] = kAlphabet[(key[k] >> (2 * (count - 1 - b))) & 3U];
  }
  return s;
}

namespace detail {

inline bool key_less(const std::uint64_t* a, const std::uint64_t* b, std::size_t W) {
  return std::lexicographical_compare(a, a + W, b, b + W);
}

inline bool key_equal(const std::uint64_t* a, const std::uint64_t* b, std::size_t W) { return std::equal(a, a + W, b); }

}  // namespace detail

// Sparse K x N column-stochastic matrix: entry (i, j) is the probability that a
// read sampled from species j is the k-mer of compact row i. Rows are the
// observed k-mers in ascending lexicographic order.
class ReadSamplingMatrix {
 public:
  ReadSamplingMatrix() = default;

  // Assembles and validates a matrix (used by the builder and the reader).
  // `row_keys` holds K packed keys back to back.
  ReadSamplingMatrix(int read_length, std::vector<std::uint64_t> row_keys, std::vector<std::size_t> col_lengths,
                     SparseMat entries)
      : read_length_(read_length),
        words_(mixrecon::key_words(read_length)),
        row_keys_(std::move(row_keys)),
        col_lengths_(std::move(col_lengths)),
        entries_(std::move(entries)) {
    if (read_length_ < 1 || read_length_ > kMaxMatrixReadLength) throw FormatError("read matrix has invalid read length");
    if (row_keys_.size() % words_ != 0 || static_cast<std::size_t>(entries_.rows()) != row_keys_.size() / words_ ||
        static_cast<std::size_t>(entries_.cols()) != col_lengths_.size()) {
      throw FormatError("read matrix dimensions disagree with its row/column metadata");
    }
    for (std::size_t i = 1; i < rows(); ++i) {
      if (!detail::key_less(key_ptr(i - 1), key_ptr(i), words_)) {
        throw FormatError("read matrix row keys must be strictly increasing");
      }
    }
    const std::size_t tail_bases = static_cast<std::size_t>(read_length_) - 32 * (words_ - 1);
    const std::uint64_t last_mask = tail_bases == 32 ? ~std::uint64_t{0} : pow4(static_cast<int>(tail_bases)) - 1;
    for (std::size_t i = 0; i < rows(); ++i) {
      if ((key_ptr(i)[words_ - 1] & ~last_mask) != 0) throw FormatError("read matrix row key exceeds 4^L");
    }
    entries_.makeCompressed();
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      double sum = 0.0;
      for (SparseMat::InnerIterator it(entries_, j); it; ++it) {
        if (!(it.value() > 0.0)) throw FormatError("read matrix stores a non-positive entry");
        sum += it.value();
      }
      if (std::abs(sum - 1.0) > kColumnSumTolerance) {
        throw FormatError("column " + std::to_string(j + 1) + " sums to " + std::to_string(sum));
      }
    }
  }

  int read_length() const { return read_length_; }
  std::size_t rows() const { return words_ == 0 ? 0 : row_keys_.size() / words_; }
  std::size_t cols() const { return col_lengths_.size(); }
  std::size_t nonzeros() const { return static_cast<std::size_t>(entries_.nonZeros()); }
  std::size_t key_words() const { return words_; }

  const SparseMat& entries() const { return entries_; }
  const std::vector<std::uint64_t>& row_keys() const { return row_keys_; }
  const std::vector<std::size_t>& col_lengths() const { return col_lengths_; }
  static constexpr const char* short_sequence_convention() { return "uniform_tail"; }

  std::span<const std::uint64_t> row_key(std::size_t row) const { return {key_ptr(row), words_}; }

  // Compact row (0-based) of a packed key, if that read is modeled.
  std::optional<std::size_t> row_of(std::span<const std::uint64_t> key) const {
    if (key.size() != words_) return std::nullopt;
    std::size_t lo = 0, hi = rows();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (detail::key_less(key_ptr(mid), key.data(), words_)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo < rows() && detail::key_equal(key_ptr(lo), key.data(), words_)) return lo;
    return std::nullopt;
  }

  std::optional<std::size_t> row_of(std::string_view kmer) const {
    if (kmer.size() != static_cast<std::size_t>(read_length_)) return std::nullopt;
    return row_of(pack_kmer(kmer));
  }

  std::string row_kmer(std::size_t row) const { return unpack_kmer(row_key(row), read_length_); }

  // 1-based integer code of a row; only for L <= kMaxReadLength.
  KmerCode row_code(std::size_t row) const {
    if (read_length_ > kMaxReadLength) throw InvalidArgument("integer k-mer codes need L <= 31");
    return {key_ptr(row)[0] + 1, read_length_};
  }

  Eigen::VectorXd column_sums() const {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols()));
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      for (SparseMat::InnerIterator it(entries_, j); it; ++it) sums[j] += it.value();
    }
    return sums;
  }

 private:
  const std::uint64_t* key_ptr(std::size_t row) const { return row_keys_.data() + row * words_; }

  int read_length_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> row_keys_;
  std::vector<std::size_t> col_lengths_;
  SparseMat entries_;
};

namespace detail {

// Packed keys of a set of reads, back to back, W words each.
struct KeyList {
  std::size_t W = 1;
  std::vector<std::uint64_t> words;
  std::vector<std::uint32_t> counts;

  std::size_t size() const { return counts.size(); }
  const std::uint64_t* at(std::size_t i) const { return words.data() + i * W; }
};

// Sorts keys and merges duplicates, summing counts.
inline KeyList sort_unique(const KeyList& in) {
  std::vector<std::size_t> order(in.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key_less(in.at(a), in.at(b), in.W); });
  KeyList out;
  out.W = in.W;
  for (std::size_t idx : order) {
    if (!out.counts.empty() && key_equal(out.words.data() + (out.size() - 1) * out.W, in.at(idx), in.W)) {
      out.counts.back() += in.counts[idx];
      continue;
    }
    out.words.insert(out.words.end(), in.at(idx), in.at(idx) + in.W);
    out.counts.push_back(in.counts[idx]);
  }
  return out;
}

// Distinct reads of one column with multiplicities, ascending.
inline KeyList column_kmers(const std::string& seq, int L) {
  const std::size_t W = key_words(L);
  KeyList raw;
  raw.W = W;
  const auto n = seq.size();
  const auto len = static_cast<std::size_t>(L);
  if (n >= len) {
    const std::size_t windows = n - len + 1;
    raw.words.reserve(windows * W);
    raw.counts.assign(windows, 1);
    const std::size_t tail_bases = len - 32 * (W - 1);
    const std::uint64_t last_mask = tail_bases == 32 ? ~std::uint64_t{0} : pow4(static_cast<int>(tail_bases)) - 1;
    std::vector<std::uint64_t> key(W);
    pack_kmer(std::string_view(seq).substr(0, len), key);
    raw.words.insert(raw.words.end(), key.begin(), key.end());
    for (std::size_t k = len; k < n; ++k) {
      // Shift one base out of the front and the new base into the back.
      for (std::size_t w = 0; w < W; ++w) {
        const bool last = w + 1 == W;
        const std::uint64_t incoming =
            last ? static_cast<std::uint64_t>(nucleotide_digit(seq[k]))
                 : (w + 2 == W ? (key[w + 1] >> (2 * (tail_bases - 1))) & 3U : key[w + 1] >> 62);
        key[w] = (key[w] << 2) | incoming;
        if (last) key[w] &= last_mask;
      }
      raw.words.insert(raw.words.end(), key.begin(), key.end());
    }
  } else {
    const int tail = L - static_cast<int>(n);
    if (tail > kMaxTailExponent) {
      throw CapacityError("sequence of length " + std::to_string(n) + " needs 4^" + std::to_string(tail) +
                          " tail reads at L=" + std::to_string(L) + " (cap 4^" + std::to_string(kMaxTailExponent) + ")");
    }
    const std::uint64_t tails = pow4(tail);
    raw.counts.assign(tails, 1);
    raw.words.reserve(tails * W);
    std::string read = seq + std::string(static_cast<std::size_t>(tail), 'A');
    std::vector<std::uint64_t> key(W);
    for (std::uint64_t t = 0; t < tails; ++t) {
      std::uint64_t v = t;
      for (int b = L - 1; b >= static_cast<int>(n); --b) {
        read[static_cast<std::size_t>(b)] = kAlphabet[v & 3U];
        v >>= 2;
      }
      pack_kmer(read, key);
      raw.words.insert(raw.words.end(), key.begin(), key.end());
    }
  }
  return sort_unique(raw);
}

}  // namespace detail

// Uniform error-free read sampling. For n_j >= L, entry = (windows equal to the
// k-mer) / (n_j - L + 1); for n_j < L the read is the sequence followed by a
// uniform tail, each such read having probability 4^(n_j - L).
inline ReadSamplingMatrix build_matrix(const SequenceDatabase& db, int L, std::size_t workers = 0) {
  if (L < 1 || L > kMaxMatrixReadLength) {
    throw InvalidArgument("read length L=" + std::to_string(L) + " outside [1, " + std::to_string(kMaxMatrixReadLength) + "]");
  }
  if (db.empty()) throw InvalidArgument("cannot build a read matrix from an empty database");

  const std::size_t N = db.size();
  const std::size_t W = key_words(L);
  std::vector<detail::KeyList> per_column(N);
  parallel_for(N, workers, [&](std::size_t j) { per_column[j] = detail::column_kmers(db.records()[j].sequence, L); });

  detail::KeyList all;
  all.W = W;
  for (const auto& col : per_column) {
    all.words.insert(all.words.end(), col.words.begin(), col.words.end());
    all.counts.insert(all.counts.end(), col.size(), 1U);
  }
  detail::KeyList rows = detail::sort_unique(all);
  all = {};
  const std::size_t K = rows.size();

  SparseMat entries(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
  Eigen::VectorXi reserve(static_cast<Eigen::Index>(N));
  for (std::size_t j = 0; j < N; ++j) reserve[static_cast<Eigen::Index>(j)] = static_cast<int>(per_column[j].size());
  entries.reserve(reserve);
  std::vector<std::size_t> lengths = db.lengths();
  for (std::size_t j = 0; j < N; ++j) {
    const auto n = static_cast<long long>(lengths[j]);
    const bool short_seq = n < L;
    const double denom = short_seq ? 1.0 : static_cast<double>(n - L + 1);
    const double tail_weight = short_seq ? std::ldexp(1.0, -2 * (L - static_cast<int>(n))) : 1.0;
    std::size_t lo = 0;
    const auto& col = per_column[j];
    for (std::size_t e = 0; e < col.size(); ++e) {
      // Column keys ascend, so the search window only moves forward.
      std::size_t hi = K;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (detail::key_less(rows.at(mid), col.at(e), W)) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      entries.insert(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(j)) =
          tail_weight * static_cast<double>(col.counts[e]) / denom;
    }
    per_column[j] = {};
  }
  entries.makeCompressed();
  return ReadSamplingMatrix(L, std::move(rows.words), std::move(lengths), std::move(entries));
}

// Columns `ids` (0-based) of A as a K x |ids| matrix.
inline SparseMat select_columns(const SparseMat& A, std::span<const std::size_t> ids) {
  SparseMat out(A.rows(), static_cast<Eigen::Index>(ids.size()));
  Eigen::VectorXi reserve(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto j = static_cast<Eigen::Index>(ids[c]);
    reserve[static_cast<Eigen::Index>(c)] =
        static_cast<int>(A.outerIndexPtr()[j + 1] - A.outerIndexPtr()[j]);
  }
  out.reserve(reserve);
  for (std::size_t c = 0; c < ids.size(); ++c) {
    for (SparseMat::InnerIterator it(A, static_cast<Eigen::Index>(ids[c])); it; ++it) {
      out.insert(it.row(), static_cast<Eigen::Index>(c)) = it.value();
    }
  }
  out.makeCompressed();
  return out;
}

namespace detail {

inline void check_lengths(const Eigen::VectorXd& values, std::span<const std::size_t> lengths) {
  if (static_cast<std::size_t>(values.size()) != lengths.size()) {
    throw InvalidArgument("frequency vector has " + std::to_string(values.size()) + " entries but " +
                          std::to_string(lengths.size()) + " lengths were given");
  }
  for (auto n : lengths) {
    if (n == 0) throw InvalidArgument("sequence lengths must be positive");
  }
}

}  // namespace detail

inline FrequencyVector reweight_to_dna(const FrequencyVector& x, std::span<const std::size_t> lengths) {
  if (x.kind != FrequencyKind::species) throw InvalidArgument("reweight_to_dna expects species frequencies");
  check_frequency_vector(x);
  detail::check_lengths(x.values, lengths);
  Eigen::VectorXd w(x.values.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = x.values[j] * static_cast<double>(lengths[static_cast<std::size_t>(j)]);
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidArgument("cannot reweight an all-zero frequency vector");
  return {w / total, FrequencyKind::dna_weighted, true};
}

inline FrequencyVector unweight_from_dna(const FrequencyVector& x_prime, std::span<const std::size_t> lengths) {
  if (x_prime.kind != FrequencyKind::dna_weighted) {
    throw InvalidArgument("unweight_from_dna expects DNA-weighted frequencies");
  }
  check_frequency_vector(x_prime);
  detail::check_lengths(x_prime.values, lengths);
  Eigen::VectorXd w(x_prime.values.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    w[j] = x_prime.values[j] / static_cast<double>(lengths[static_cast<std::size_t>(j)]);
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidArgument("cannot unweight an all-zero frequency vector");
  return {w / total, FrequencyKind::species, true};
}

// A x' over the stored rows: the read distribution of the mixture.
inline SparseVec expected_read_distribution(const ReadSamplingMatrix& A, const FrequencyVector& x_prime) {
  if (x_prime.size() != A.cols()) {
    throw InvalidArgument("frequency vector has " + std::to_string(x_prime.size()) + " entries, matrix has " +
                          std::to_string(A.cols()) + " columns");
  }
  check_frequency_vector(x_prime);
  const Eigen::VectorXd dense = A.entries() * x_prime.values;
  return dense.sparseView(0.0, 0.0);
}

// ---------------------------------------------------------------------------
// Binary serialization.
//
//   "MIXRMAT1" | u64 header length | JSON header | payload
//   payload: K x W u64 packed row keys | N x u64 column lengths |
//            nnz x (u32 row, u32 col, f64 value) sorted by (row, col)
//
// All integers and doubles little-endian. The header carries a CRC-32 of the
// payload.
// ---------------------------------------------------------------------------

inline constexpr char kMatrixMagic[8] = {'M', 'I', 'X', 'R', 'M', 'A', 'T', '1'};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    static_assert(std::is_integral_v<T>);
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view rest() const { return data_.substr(pos_); }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("read matrix file is truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string matrix_payload(const ReadSamplingMatrix& A) {
  std::string payload;
  payload.reserve(8 * (A.row_keys().size() + A.cols()) + 16 * A.nonzeros());
  for (auto word : A.row_keys()) put_le<std::uint64_t>(payload, word);
  for (auto n : A.col_lengths()) put_le<std::uint64_t>(payload, n);
  const Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t> by_row = A.entries();
  for (Eigen::Index i = 0; i < by_row.outerSize(); ++i) {
    for (decltype(by_row)::InnerIterator it(by_row, i); it; ++it) {
      put_le<std::uint32_t>(payload, static_cast<std::uint32_t>(i));
      put_le<std::uint32_t>(payload, static_cast<std::uint32_t>(it.col()));
      put_f64(payload, it.value());
    }
  }
  return payload;
}

}  // namespace detail

inline nlohmann::json matrix_header(const ReadSamplingMatrix& A, const std::string& checksum) {
  return {{"format", "mixrecon-read-matrix"},
          {"version", 1},
          {"L", A.read_length()},
          {"K", A.rows()},
          {"N", A.cols()},
          {"nnz", A.nonzeros()},
          {"key_words", A.key_words()},
          {"short_sequence_convention", ReadSamplingMatrix::short_sequence_convention()},
          {"checksum", checksum}};
}

inline nlohmann::json matrix_header(const ReadSamplingMatrix& A) {
  return matrix_header(A, detail::hex32(detail::crc32_of(detail::matrix_payload(A))));
}

inline std::string serialize_matrix(const ReadSamplingMatrix& A) {
  const std::string payload = detail::matrix_payload(A);
  const std::string header = matrix_header(A, detail::hex32(detail::crc32_of(payload))).dump();
  std::string out(kMatrixMagic, sizeof(kMatrixMagic));
  detail::put_le<std::uint64_t>(out, header.size());
  out += header;
  out += payload;
  return out;
}

inline ReadSamplingMatrix deserialize_matrix(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.take(sizeof(kMatrixMagic)) != std::string_view(kMatrixMagic, sizeof(kMatrixMagic))) {
    throw FormatError("not a read matrix file (bad magic)");
  }
  const auto header_len = in.get<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.take(static_cast<std::size_t>(header_len)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad read matrix header: ") + e.what());
  }
  const std::string_view payload = in.rest();
  if (header.value("checksum", std::string{}) != detail::hex32(detail::crc32_of(payload))) {
    throw FormatError("read matrix checksum mismatch");
  }
  const auto L = header.at("L").get<int>();
  const auto K = header.at("K").get<std::size_t>();
  const auto N = header.at("N").get<std::size_t>();
  const auto nnz = header.at("nnz").get<std::size_t>();
  if (L < 1 || L > kMaxMatrixReadLength) throw FormatError("read matrix has invalid read length");
  const std::size_t W = key_words(L);
  if (payload.size() != 8 * (K * W + N) + 16 * nnz) throw FormatError("read matrix payload size mismatch");

  detail::ByteReader body(payload);
  std::vector<std::uint64_t> codes(K * W);
  for (auto& c : codes) c = body.get<std::uint64_t>();
  std::vector<std::size_t> lengths(N);
  for (auto& n : lengths) n = static_cast<std::size_t>(body.get<std::uint64_t>());
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto row = body.get<std::uint32_t>();
    const auto col = body.get<std::uint32_t>();
    const double v = body.get_f64();
    if (row >= K || col >= N) throw FormatError("read matrix entry out of range");
    triplets.emplace_back(row, col, v);
  }
  SparseMat entries(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
  entries.setFromTriplets(triplets.begin(), triplets.end());
  if (static_cast<std::size_t>(entries.nonZeros()) != nnz) throw FormatError("read matrix has duplicate entries");
  return ReadSamplingMatrix(L, std::move(codes), std::move(lengths), std::move(entries));
}

inline void save_matrix(const ReadSamplingMatrix& A, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize_matrix(A));
}

inline ReadSamplingMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_matrix(bytes);
}

}  // namespace mixrecon
