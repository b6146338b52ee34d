#include "nfaq/text.hpp"

#include <cctype>

namespace nfaq {

std::string fold(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // leading whitespace is dropped
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> tokens;
  const std::string folded = fold(s);
  std::size_t i = 0;
  while (i < folded.size()) {
    std::size_t j = folded.find(' ', i);
    if (j == std::string::npos) j = folded.size();
    std::size_t b = i, e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(folded[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(folded[e - 1]))) --e;
    if (e > b) tokens.push_back(folded.substr(b, e - b));
    i = j + 1;
  }
  return tokens;
}

std::int64_t count_chars_utf8(const std::string& s) {
  std::int64_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;  // skip continuation bytes
  }
  return n;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string replace_all(std::string s, const std::string& needle,
                        const std::string& replacement) {
  if (needle.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(needle, pos)) != std::string::npos) {
    s.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
  return s;
}

}  // namespace nfaq
