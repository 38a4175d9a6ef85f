#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evgraph/corpus.hpp"

namespace evgraph {

// Entity-like spans, quoted spans, 4-digit years and remaining non-stopword
// content tokens, in claim order, de-duplicated. Content tokens are lowercased.
std::vector<std::string> extract_query_terms(std::string_view claim);

// Sorted by term id.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  double dot(const SparseVector& other) const;
};

// 0 when either vector is zero.
double cosine(const SparseVector& a, const SparseVector& b);

// Text indexed for a page: raw sentences and captions plus linearized cells
// and list items, newline separated.
std::string page_text(const PageStore& store, const Page& page);

// TF-IDF index over whole pages. TF is the raw count, IDF is ln(N / df).
// Stopwords are dropped; the vocabulary is sorted so term ids are stable.
class DocIndex {
 public:
  static DocIndex build(const PageStore& store);

  std::size_t page_count() const { return page_ids_.size(); }
  const std::vector<std::string>& page_ids() const { return page_ids_; }
  const std::vector<std::string>& vocabulary() const { return terms_; }
  std::optional<std::uint32_t> term_id(std::string_view term) const;
  double idf(std::uint32_t term) const { return idf_[term]; }

  bool contains(std::string_view page_id) const;
  // Throws NotFoundError(kPage).
  const SparseVector& doc_vector(std::string_view page_id) const;

  // TF-IDF vector of arbitrary text; out-of-vocabulary terms are ignored.
  SparseVector vectorize(std::string_view text) const;

  // Normalized title (see text::normalize_title) -> page id.
  std::optional<std::string> lookup_title(std::string_view normalized) const;
  std::size_t max_title_tokens() const { return max_title_tokens_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<double> idf_;
  std::vector<std::string> page_ids_;
  std::unordered_map<std::string, std::size_t> page_pos_;
  std::vector<SparseVector> doc_vectors_;
  std::unordered_map<std::string, std::string> titles_;
  std::size_t max_title_tokens_ = 0;
};

// Search backend returning candidate page titles for query terms. A live web
// client would implement this; results outside the store are discarded by
// candidate_pages regardless.
class SearchClient {
 public:
  virtual ~SearchClient() = default;
  virtual std::vector<std::string> query(const std::vector<std::string>& terms) = 0;
};

// Offline stand-in for a title search API: for each term, pages whose title
// tokens contain all of the term's non-stopword tokens, shortest titles first,
// at most `per_term` per term.
class LocalTitleSearch : public SearchClient {
 public:
  explicit LocalTitleSearch(const PageStore& store, std::size_t per_term = 10);
  std::vector<std::string> query(const std::vector<std::string>& terms) override;

 private:
  struct Entry {
    std::string page_id;
    std::vector<std::string> tokens;  // sorted
  };
  std::vector<Entry> entries_;
  std::size_t per_term_;
};

struct CandidateSet {
  std::vector<std::string> pages;  // sorted, unique
  bool search_failed = false;
  std::string failure;
};

// Union of search results present in the index and direct title-index hits
// for extracted terms and claim n-grams. A throwing client degrades to the
// title-index hits and sets search_failed.
CandidateSet candidate_pages(const DocIndex& index, SearchClient* client, std::string_view claim);

struct ScoredPage {
  std::string page_id;
  double score = 0.0;
};

inline constexpr int kDefaultRetrievalK = 7;

// Candidates by descending cosine to the claim, ties by page id. Returns
// min(k, |candidates|) entries. Candidates absent from the index are skipped.
std::vector<ScoredPage> rank_pages(const DocIndex& index, std::string_view claim,
                                   const std::vector<std::string>& candidates, int k = kDefaultRetrievalK);

// Fraction of claims whose gold pages all appear in the top k of their ranked
// list. Throws DataError for an empty claim set or misaligned inputs.
double recall_at_k(const std::vector<std::vector<std::string>>& ranked,
                   const std::vector<std::vector<std::string>>& gold, int k);

}  // namespace evgraph
