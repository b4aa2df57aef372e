#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mixrecon/error.hpp"

namespace mixrecon {

// Largest read length whose code space 4^L fits a 64-bit code.
inline constexpr int kMaxReadLength = 31;

inline constexpr char kAlphabet[4] = {'A', 'C', 'G', 'T'};

// Digit of an uppercase nucleotide (A<C<G<T), or -1.
constexpr int nucleotide_digit(char c) {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

constexpr std::uint64_t pow4(int exponent) { return std::uint64_t{1} << (2 * exponent); }

// Lexicographic code of a read. `value` is 1-based: "AA..A" -> 1, "TT..T" -> 4^L.
struct KmerCode {
  std::uint64_t value = 1;
  int length = 0;

  friend bool operator==(const KmerCode&, const KmerCode&) = default;
  friend auto operator<=>(const KmerCode&, const KmerCode&) = default;
};

namespace detail {

inline void check_length(std::size_t length) {
  if (length == 0 || length > static_cast<std::size_t>(kMaxReadLength)) {
    throw InvalidArgument("read length must be in [1, " + std::to_string(kMaxReadLength) +
                          "], got " + std::to_string(length));
  }
}

// 0-based code; throws on characters outside the alphabet.
inline std::uint64_t encode0(std::string_view s) {
  std::uint64_t code = 0;
  for (char c : s) {
    const int d = nucleotide_digit(c);
    if (d < 0) throw InvalidArgument(std::string("invalid nucleotide '") + c + "'");
    code = (code << 2) | static_cast<std::uint64_t>(d);
  }
  return code;
}

inline std::string decode0(std::uint64_t code, int length) {
  std::string s(static_cast<std::size_t>(length), 'A');
  for (int i = length - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kAlphabet[code & 3U];
    code >>= 2;
  }
  return s;
}

}  // namespace detail

inline KmerCode lex_encode(std::string_view s) {
  detail::check_length(s.size());
  return {detail::encode0(s) + 1, static_cast<int>(s.size())};
}

inline KmerCode lex_encode(std::string_view s, int length) {
  if (length < 0 || s.size() != static_cast<std::size_t>(length)) {
    throw InvalidArgument("read has length " + std::to_string(s.size()) + ", expected " +
                          std::to_string(length));
  }
  return lex_encode(s);
}

inline std::string lex_decode(KmerCode code) {
  detail::check_length(static_cast<std::size_t>(code.length < 0 ? 0 : code.length));
  if (code.value < 1 || code.value > pow4(code.length)) {
    throw InvalidArgument("k-mer code " + std::to_string(code.value) + " outside [1, 4^" +
                          std::to_string(code.length) + "]");
  }
  return detail::decode0(code.value - 1, code.length);
}

}  // namespace mixrecon
