#include "evgraph/text.hpp"

#include <algorithm>
#include <unordered_set>

namespace evgraph::text {
namespace {

#include "stopwords.inc"

bool is_word_byte(unsigned char ch) {
  return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
         ch >= 0x80;
}

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> set(std::begin(kStopwords),
                                                        std::end(kStopwords));
  return set;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : s) {
    if (is_word_byte(ch)) {
      current.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a')
                                               : static_cast<char>(ch));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool is_stopword(std::string_view lowercase_token) {
  return stopword_set().contains(lowercase_token);
}

std::size_t stopword_count() { return std::size(kStopwords); }

std::string normalize_title(std::string_view title) {
  std::string out;
  for (const auto& tok : tokenize(title)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace evgraph::text
