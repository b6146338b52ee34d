#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nfaq {

// Lowercases ASCII letters and collapses whitespace runs to single spaces,
// trimming the ends. All cue/observation comparisons run on folded strings
// so cosmetic casing and spacing changes are invisible to matching.
std::string fold(const std::string& s);

// Splits on whitespace, folds, and strips punctuation from token edges.
// This is the tokenization rule behind token growth and Jaccard metrics.
std::vector<std::string> tokenize(const std::string& s);

// Counts Unicode code points in a UTF-8 string (equals byte length on
// pure-ASCII input). Malformed continuation bytes count as one each.
std::int64_t count_chars_utf8(const std::string& s);

// 64-bit FNV-1a, used for cache keys and observation digests.
std::uint64_t fnv1a64(const std::string& data);
std::string to_hex(std::uint64_t v);

// Replaces every occurrence of `needle` in `s` with `replacement`.
std::string replace_all(std::string s, const std::string& needle,
                        const std::string& replacement);

}  // namespace nfaq
