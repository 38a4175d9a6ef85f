#include "evgraph/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "evgraph/errors.hpp"
#include "evgraph/linearizer.hpp"
#include "evgraph/text.hpp"

namespace evgraph {
namespace {

bool is_word_byte(unsigned char ch) {
  return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch >= 0x80;
}

struct RawToken {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool sentence_initial = false;
  bool quoted = false;
};

// Surface tokens with offsets. '-' and '\'' join word characters ("Sang-in").
std::vector<RawToken> surface_tokens(std::string_view s) {
  std::vector<RawToken> out;
  bool in_quote = false;
  bool boundary = true;  // start of text or after . ! ?
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char ch = static_cast<unsigned char>(s[i]);
    if (ch == '"') {
      in_quote = !in_quote;
      ++i;
      continue;
    }
    if (!is_word_byte(ch)) {
      if (ch == '.' || ch == '!' || ch == '?') boundary = true;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size()) {
      const unsigned char cj = static_cast<unsigned char>(s[j]);
      if (is_word_byte(cj)) {
        ++j;
      } else if ((cj == '-' || cj == '\'') && j + 1 < s.size() &&
                 is_word_byte(static_cast<unsigned char>(s[j + 1]))) {
        ++j;
      } else {
        break;
      }
    }
    out.push_back({std::string(s.substr(i, j - i)), i, j, boundary, in_quote});
    boundary = false;
    i = j;
  }
  return out;
}

bool capitalized(const std::string& tok) { return !tok.empty() && tok[0] >= 'A' && tok[0] <= 'Z'; }

bool is_year(const std::string& tok) {
  return tok.size() == 4 && std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool only_whitespace(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

SparseVector tfidf(const std::vector<std::string>& tokens,
                   const std::unordered_map<std::string, std::uint32_t>& ids, const std::vector<double>& idf) {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokens) {
    if (text::is_stopword(tok)) continue;
    auto it = ids.find(tok);
    if (it != ids.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  for (const auto& [term, tf] : counts) {
    const double w = tf * idf[term];
    if (w != 0.0) v.entries.emplace_back(term, w);
  }
  return v;
}

}  // namespace

std::vector<std::string> extract_query_terms(std::string_view claim) {
  const auto tokens = surface_tokens(claim);
  std::vector<std::string> terms;
  std::set<std::string> seen;
  auto emit = [&](std::string term) {
    if (!term.empty() && seen.insert(term).second) terms.push_back(std::move(term));
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    const RawToken& tok = tokens[i];
    if (tok.quoted) {
      // Quoted span: consecutive quoted tokens emitted as written.
      std::size_t j = i + 1;
      while (j < tokens.size() && tokens[j].quoted &&
             claim.substr(tokens[j - 1].end, tokens[j].begin - tokens[j - 1].end).find('"') == std::string_view::npos)
        ++j;
      emit(std::string(claim.substr(tok.begin, tokens[j - 1].end - tok.begin)));
      i = j;
      continue;
    }
    if (capitalized(tok.text)) {
      std::size_t j = i + 1;
      while (j < tokens.size() && !tokens[j].quoted && capitalized(tokens[j].text) &&
             only_whitespace(claim.substr(tokens[j - 1].end, tokens[j].begin - tokens[j - 1].end)))
        ++j;
      if (j - i >= 2 || !tok.sentence_initial) {
        emit(std::string(claim.substr(tok.begin, tokens[j - 1].end - tok.begin)));
        i = j;
        continue;
      }
    }
    if (is_year(tok.text)) {
      emit(tok.text);
    } else {
      // Content words; hyphenated surface tokens split the way the index does.
      for (auto& piece : text::tokenize(tok.text))
        if (!text::is_stopword(piece)) emit(piece);
    }
    ++i;
  }
  return terms;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [_, w] : entries) s += w * w;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::string page_text(const PageStore& store, const Page& page) {
  std::string out;
  for (const ElementId& id : store.elements(page)) {
    if (!out.empty()) out += '\n';
    if (id.is_sentence_kind()) {
      out += resolve(store, id).text;
    } else {
      out += linearize(store, id);
    }
  }
  return out;
}

DocIndex DocIndex::build(const PageStore& store) {
  DocIndex index;
  std::vector<std::vector<std::string>> doc_tokens;
  std::map<std::string, std::size_t> df;
  for (const Page& page : store.pages()) {
    auto tokens = text::tokenize(page_text(store, page));
    std::set<std::string> unique;
    for (const auto& t : tokens)
      if (!text::is_stopword(t)) unique.insert(t);
    for (const auto& t : unique) ++df[t];
    doc_tokens.push_back(std::move(tokens));

    index.page_pos_.emplace(page.page_id, index.page_ids_.size());
    index.page_ids_.push_back(page.page_id);
    const std::string title = text::normalize_title(page.page_id);
    if (!title.empty()) {
      // First page wins on a normalized-title collision; pages are in ingest order.
      index.titles_.emplace(title, page.page_id);
      index.max_title_tokens_ = std::max(index.max_title_tokens_, text::tokenize(page.page_id).size());
    }
  }

  const double n = static_cast<double>(store.size());
  for (const auto& [term, count] : df) {
    index.term_ids_.emplace(term, static_cast<std::uint32_t>(index.terms_.size()));
    index.terms_.push_back(term);
    index.idf_.push_back(std::log(n / static_cast<double>(count)));
  }
  for (const auto& tokens : doc_tokens) index.doc_vectors_.push_back(tfidf(tokens, index.term_ids_, index.idf_));
  return index;
}

std::optional<std::uint32_t> DocIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

bool DocIndex::contains(std::string_view page_id) const { return page_pos_.contains(std::string(page_id)); }

const SparseVector& DocIndex::doc_vector(std::string_view page_id) const {
  auto it = page_pos_.find(std::string(page_id));
  if (it == page_pos_.end())
    throw NotFoundError(NotFoundError::Reason::kPage, "page '" + std::string(page_id) + "' is not indexed");
  return doc_vectors_[it->second];
}

SparseVector DocIndex::vectorize(std::string_view text) const {
  return tfidf(text::tokenize(text), term_ids_, idf_);
}

std::optional<std::string> DocIndex::lookup_title(std::string_view normalized) const {
  auto it = titles_.find(std::string(normalized));
  if (it == titles_.end()) return std::nullopt;
  return it->second;
}

LocalTitleSearch::LocalTitleSearch(const PageStore& store, std::size_t per_term) : per_term_(per_term) {
  for (const Page& page : store.pages()) {
    auto tokens = text::tokenize(page.page_id);
    std::sort(tokens.begin(), tokens.end());
    entries_.push_back({page.page_id, std::move(tokens)});
  }
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.page_id < b.page_id;
  });
}

std::vector<std::string> LocalTitleSearch::query(const std::vector<std::string>& terms) {
  std::vector<std::string> out;
  for (const auto& term : terms) {
    std::vector<std::string> wanted;
    for (auto& t : text::tokenize(term))
      if (!text::is_stopword(t)) wanted.push_back(std::move(t));
    if (wanted.empty()) continue;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    std::size_t hits = 0;
    for (const Entry& e : entries_) {
      if (hits == per_term_) break;
      if (std::includes(e.tokens.begin(), e.tokens.end(), wanted.begin(), wanted.end())) {
        out.push_back(e.page_id);
        ++hits;
      }
    }
  }
  return out;
}

CandidateSet candidate_pages(const DocIndex& index, SearchClient* client, std::string_view claim) {
  CandidateSet result;
  std::set<std::string> pages;
  const auto terms = extract_query_terms(claim);

  if (client) {
    try {
      for (const auto& title : client->query(terms))
        if (index.contains(title)) pages.insert(title);
    } catch (const std::exception& e) {
      result.search_failed = true;
      result.failure = e.what();
    }
  }

  // Title-index fallback for entities the search misses.
  for (const auto& term : terms)
    if (auto hit = index.lookup_title(text::normalize_title(term))) pages.insert(*hit);
  const auto tokens = text::tokenize(claim);
  for (std::size_t n = 1; n <= index.max_title_tokens(); ++n) {
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      std::string key;
      bool content = false;
      for (std::size_t k = start; k < start + n; ++k) {
        if (!key.empty()) key += ' ';
        key += tokens[k];
        content = content || !text::is_stopword(tokens[k]);
      }
      if (!content) continue;
      if (auto hit = index.lookup_title(key)) pages.insert(*hit);
    }
  }

  result.pages.assign(pages.begin(), pages.end());
  return result;
}

std::vector<ScoredPage> rank_pages(const DocIndex& index, std::string_view claim,
                                   const std::vector<std::string>& candidates, int k) {
  if (k < 1) throw ConfigError("retrieval k must be >= 1");
  const SparseVector query = index.vectorize(claim);
  std::vector<ScoredPage> scored;
  std::set<std::string> seen;
  for (const auto& page : candidates) {
    if (!index.contains(page) || !seen.insert(page).second) continue;
    scored.push_back({page, cosine(query, index.doc_vector(page))});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredPage& a, const ScoredPage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.page_id < b.page_id;
  });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
  return scored;
}

double recall_at_k(const std::vector<std::vector<std::string>>& ranked,
                   const std::vector<std::vector<std::string>>& gold, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (ranked.empty()) throw DataError("recall_at_k over an empty claim set");
  if (ranked.size() != gold.size()) throw DataError("recall_at_k: ranked and gold lists differ in length");
  std::size_t covered = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto end = ranked[i].begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(ranked[i].size()));
    const bool all = std::all_of(gold[i].begin(), gold[i].end(),
                                 [&](const std::string& g) { return std::find(ranked[i].begin(), end, g) != end; });
    if (all) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(ranked.size());
}

}  // namespace evgraph
