#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evgraph::text {

// Lowercased tokens: maximal runs of ASCII alphanumerics and non-ASCII bytes
// (so UTF-8 letters stay inside words). Only ASCII is case-folded.
std::vector<std::string> tokenize(std::string_view s);

// Membership in the fixed 120-word English list (data/stopwords_en_v1.txt).
bool is_stopword(std::string_view lowercase_token);
std::size_t stopword_count();

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset) {
  for (unsigned char ch : bytes) {
    state ^= ch;
    state *= kFnvPrime;
  }
  return state;
}

// Lowercase, tokenize and join with single spaces.
std::string normalize_title(std::string_view title);

bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace evgraph::text
