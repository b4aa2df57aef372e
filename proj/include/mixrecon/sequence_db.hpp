#pragma once

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mixrecon/error.hpp"
#include "mixrecon/kmer.hpp"

namespace mixrecon {

struct SpeciesRecord {
  int id = 0;  // 1-based, contiguous
  std::string label;
  std::string sequence;

  std::size_t length() const { return sequence.size(); }
  friend bool operator==(const SpeciesRecord&, const SpeciesRecord&) = default;
};

// Deduplicated reference sequences over {A,C,G,T}. Immutable once built.
class SequenceDatabase {
 public:
  SequenceDatabase() = default;

  // Builds from (label, sequence) pairs that are already normalized. Exact
  // duplicate sequences collapse onto the first-seen record.
  static SequenceDatabase from_records(const std::vector<std::pair<std::string, std::string>>& entries) {
    SequenceDatabase db;
    std::unordered_map<std::string_view, int> seen;
    db.records_.reserve(entries.size());
    for (const auto& [label, sequence] : entries) {
      if (sequence.empty()) throw InvalidArgument("record '" + label + "' has an empty sequence");
      for (char c : sequence) {
        if (nucleotide_digit(c) < 0) {
          throw InvalidArgument("record '" + label + "' contains '" + std::string(1, c) +
                                "' outside {A,C,G,T}");
        }
      }
      // Probe against the stored copy so the view outlives `entries`.
      if (auto it = seen.find(sequence); it != seen.end()) {
        db.dedup_map_.emplace_back(label, it->second);
        continue;
      }
      SpeciesRecord rec{static_cast<int>(db.records_.size()) + 1, label, sequence};
      db.records_.push_back(std::move(rec));
      db.n_max_ = std::max(db.n_max_, sequence.size());
      // records_ was reserved, so this view stays valid.
      seen.emplace(db.records_.back().sequence, db.records_.back().id);
    }
    return db;
  }

  // Convenience for tests and generated data: labels seq1..seqN.
  static SequenceDatabase from_sequences(const std::vector<std::string>& sequences) {
    std::vector<std::pair<std::string, std::string>> entries;
    entries.reserve(sequences.size());
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      entries.emplace_back("seq" + std::to_string(i + 1), sequences[i]);
    }
    return from_records(entries);
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t n_max() const { return n_max_; }

  const std::vector<SpeciesRecord>& records() const { return records_; }

  // 1-based lookup.
  const SpeciesRecord& record(int id) const {
    if (id < 1 || static_cast<std::size_t>(id) > records_.size()) {
      throw InvalidArgument("species id " + std::to_string(id) + " out of range");
    }
    return records_[static_cast<std::size_t>(id - 1)];
  }

  std::vector<std::size_t> lengths() const {
    std::vector<std::size_t> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.length());
    return out;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.label);
    return out;
  }

  // Dropped duplicate label -> retained record id, in input order.
  const std::vector<std::pair<std::string, int>>& dedup_map() const { return dedup_map_; }

  void set_dedup_map(std::vector<std::pair<std::string, int>> map) { dedup_map_ = std::move(map); }

  friend bool operator==(const SequenceDatabase& a, const SequenceDatabase& b) {
    return a.records_ == b.records_ && a.dedup_map_ == b.dedup_map_;
  }

 private:
  std::vector<SpeciesRecord> records_;
  std::size_t n_max_ = 0;
  std::vector<std::pair<std::string, int>> dedup_map_;
};

struct FastaOptions {
  bool uppercase = true;
  bool drop_ambiguous = true;
};

struct ParsedDatabase {
  SequenceDatabase database;
  std::size_t records_read = 0;
  std::size_t dropped_ambiguous = 0;
  std::size_t duplicates_collapsed = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Reads a plain or gzip-compressed file; zlib passes plain files through.
inline std::string read_text_file(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open '" + path.string() + "'");
  std::string out;
  char buffer[1 << 16];
  for (;;) {
    const int n = gzread(file, buffer, sizeof(buffer));
    if (n < 0) {
      int errnum = 0;
      std::string msg = gzerror(file, &errnum);
      gzclose(file);
      throw IoError("read failure on '" + path.string() + "': " + msg);
    }
    if (n == 0) break;
    out.append(buffer, static_cast<std::size_t>(n));
  }
  gzclose(file);
  return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", v);
  return buf;
}

inline std::uint32_t crc32_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (!data.empty()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size(), 1U << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), chunk);
    data.remove_prefix(chunk);
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline ParsedDatabase parse_fasta_text(std::string_view text, const FastaOptions& options = {}) {
  std::vector<std::pair<std::string, std::string>> raw;
  bool in_record = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '>') {
      if (in_record && raw.back().second.empty()) {
        throw FormatError("record '" + raw.back().first + "' has no sequence (line " +
                          std::to_string(line_no) + ")");
      }
      raw.emplace_back(std::string(detail::trim(line.substr(1))), std::string{});
      in_record = true;
      continue;
    }
    if (!in_record) {
      throw FormatError("sequence data before first header at line " + std::to_string(line_no));
    }
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      raw.back().second.push_back(
          options.uppercase ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
    }
  }
  if (raw.empty()) throw FormatError("empty database: no FASTA records");
  if (raw.back().second.empty()) throw FormatError("record '" + raw.back().first + "' has no sequence");

  ParsedDatabase parsed;
  parsed.records_read = raw.size();
  std::vector<std::pair<std::string, std::string>> clean;
  clean.reserve(raw.size());
  for (auto& entry : raw) {
    const bool ok = std::all_of(entry.second.begin(), entry.second.end(),
                                [](char c) { return nucleotide_digit(c) >= 0; });
    if (!ok) {
      if (!options.drop_ambiguous) {
        throw FormatError("record '" + entry.first + "' contains characters outside {A,C,G,T}");
      }
      ++parsed.dropped_ambiguous;
      continue;
    }
    clean.push_back(std::move(entry));
  }
  parsed.database = SequenceDatabase::from_records(clean);
  parsed.duplicates_collapsed = parsed.database.dedup_map().size();
  return parsed;
}

inline ParsedDatabase parse_fasta(const std::filesystem::path& path, const FastaOptions& options = {}) {
  return parse_fasta_text(detail::read_text_file(path), options);
}

// Normalized FASTA: one header line and one sequence line per record.
inline std::string to_fasta(const SequenceDatabase& db) {
  std::string out;
  for (const auto& r : db.records()) {
    out += '>';
    out += r.label;
    out += '\n';
    out += r.sequence;
    out += '\n';
  }
  return out;
}

inline std::string database_checksum(const SequenceDatabase& db) {
  return detail::hex32(detail::crc32_of(to_fasta(db)));
}

inline nlohmann::json database_manifest(const SequenceDatabase& db) {
  nlohmann::json dedup = nlohmann::json::array();
  for (const auto& [label, id] : db.dedup_map()) dedup.push_back({label, id});
  return {{"N", db.size()},
          {"n_max", db.n_max()},
          {"labels", db.labels()},
          {"dedup_map", dedup},
          {"checksum", database_checksum(db)}};
}

// Writes the FASTA and a `<fasta>.json` manifest next to it.
inline void save_database(const SequenceDatabase& db, const std::filesystem::path& fasta_path) {
  detail::write_text_file(fasta_path, to_fasta(db));
  auto manifest_path = fasta_path;
  manifest_path += ".json";
  detail::write_text_file(manifest_path, database_manifest(db).dump(2) + "\n");
}

// Loads normalized FASTA and, when present, its manifest (restores dedup_map
// and verifies the checksum).
inline SequenceDatabase load_database(const std::filesystem::path& fasta_path, const FastaOptions& options = {}) {
  auto parsed = parse_fasta(fasta_path, options);
  auto manifest_path = fasta_path;
  manifest_path += ".json";
  if (!std::filesystem::exists(manifest_path)) return std::move(parsed.database);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad database manifest '" + manifest_path.string() + "': " + e.what());
  }
  auto db = std::move(parsed.database);
  if (manifest.value("checksum", std::string{}) != database_checksum(db)) {
    throw FormatError("database manifest checksum does not match '" + fasta_path.string() + "'");
  }
  std::vector<std::pair<std::string, int>> dedup;
  for (const auto& entry : manifest.value("dedup_map", nlohmann::json::array())) {
    dedup.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<int>());
  }
  db.set_dedup_map(std::move(dedup));
  return db;
}

}  // namespace mixrecon
