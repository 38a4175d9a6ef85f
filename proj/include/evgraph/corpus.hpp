#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evgraph {

enum class ElementKind { kSentence, kCell, kHeaderCell, kItem, kTableCaption };

std::string_view kind_name(ElementKind kind);
int index_arity(ElementKind kind);

// Canonical evidence address. Cell coordinates refer to the span-expanded grid.
struct ElementId {
  std::string page;
  ElementKind kind = ElementKind::kSentence;
  std::array<int, 3> index{0, 0, 0};  // entries past index_arity(kind) stay zero

  static ElementId sentence(std::string page, int s);
  static ElementId cell(std::string page, int table, int row, int col, bool header = false);
  static ElementId item(std::string page, int list, int item);
  static ElementId caption(std::string page, int table);

  // "<page>_sentence_<s>", "<page>_cell_<t>_<r>_<c>", ...
  std::string str() const;
  // The same form without the "<page>_" prefix, e.g. "cell_0_2_1".
  std::string local_str() const;

  bool is_cell_kind() const { return kind == ElementKind::kCell || kind == ElementKind::kHeaderCell; }
  bool is_sentence_kind() const {
    return kind == ElementKind::kSentence || kind == ElementKind::kTableCaption;
  }

  friend auto operator<=>(const ElementId&, const ElementId&) = default;
};

// Throws ParseError naming the offending segment.
ElementId parse_element_id(std::string_view s);

struct ElementIdHash {
  std::size_t operator()(const ElementId& id) const;
};

struct Cell {
  std::string text;
  int row_span = 1;
  int col_span = 1;
  bool is_header = false;
};

enum class TableKind { kInfobox, kGeneral };

std::string_view table_kind_name(TableKind kind);

struct Table {
  int index = 0;
  std::optional<std::string> caption;
  std::optional<TableKind> declared_kind;
  std::vector<std::vector<Cell>> rows;  // as authored, spans unexpanded
};

// A table after span expansion. Each logical (row, col) holds a copy of the
// source cell plus the coordinates of its top-left (anchor) position.
class SpanGrid {
 public:
  struct Slot {
    Cell cell;
    int anchor_row = 0;
    int anchor_col = 0;
  };

  SpanGrid() = default;
  SpanGrid(int rows, int cols, std::vector<Slot> slots);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool contains(int r, int c) const { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }
  const Slot& at(int r, int c) const { return slots_[static_cast<std::size_t>(r * cols_ + c)]; }
  bool is_anchor(int r, int c) const {
    const auto& s = at(r, c);
    return s.anchor_row == r && s.anchor_col == c;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Slot> slots_;
};

// Throws StructureError on overlapping spans, spans past the table edge, or
// rows of unequal width after expansion.
SpanGrid expand_spans(const Table& table);

struct ListItem {
  std::string text;
  int depth = 0;
};

struct ListBlock {
  std::vector<std::string> subheaders;
  std::vector<ListItem> items;
};

struct Page {
  std::string page_id;
  std::vector<std::string> sentences;
  std::vector<Table> tables;
  std::vector<ListBlock> lists;
};

// Immutable-after-ingest collection of pages, addressable by page id.
class PageStore {
 public:
  // Validates and expands every table. Throws DataError on a duplicate page
  // id and StructureError on malformed tables.
  void add(Page page);

  std::size_t size() const { return pages_.size(); }
  bool empty() const { return pages_.empty(); }
  bool contains(std::string_view page_id) const;
  const std::vector<Page>& pages() const { return pages_; }

  const Page* find(std::string_view page_id) const;
  // Throws NotFoundError(kPage).
  const Page& page(std::string_view page_id) const;
  // Throws NotFoundError(kPage / kIndex).
  const SpanGrid& grid(std::string_view page_id, int table) const;

  // Sentences, then per table its caption and anchor cells in row-major
  // order, then list items.
  std::vector<ElementId> elements(const Page& page) const;
  std::vector<ElementId> all_elements() const;

 private:
  std::size_t position(std::string_view page_id) const;

  std::vector<Page> pages_;
  std::vector<std::vector<SpanGrid>> grids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Element {
  ElementId id;
  std::string text;
  int table = -1;
  int list = -1;
  int row = -1;
  int col = -1;
  int depth = 0;
};

// Throws NotFoundError: kPage for an unknown page, kIndex for an out-of-range
// index, kKind when a cell id's header flag disagrees with the grid.
Element resolve(const PageStore& store, const ElementId& id);

enum class Label { kSupports, kRefutes, kNei };

std::string_view label_name(Label label);  // "SUPPORTS", "REFUTES", "NOT ENOUGH INFO"
Label parse_label(std::string_view s);     // throws ParseError

struct ClaimRecord {
  std::int64_t claim_id = 0;
  std::string claim;
  Label label = Label::kNei;
  std::vector<std::vector<ElementId>> evidence_sets;

  // Union of all evidence sets, sorted and de-duplicated.
  std::vector<ElementId> evidence_union() const;
};

// Corpus JSON-lines, one page per line. Blank lines are skipped. Throws
// IngestError carrying the 1-based line number.
PageStore ingest_corpus(std::istream& in);
PageStore load_corpus(const std::string& path);

// Adapter point for other dump formats: a converter yields pages one at a
// time and ingest_pages stores them with the same validation.
class PageSource {
 public:
  virtual ~PageSource() = default;
  virtual std::optional<Page> next() = 0;
};
PageStore ingest_pages(PageSource& source);
void write_corpus(std::ostream& out, const PageStore& store);

// Claims JSON-lines. When `store` is given, every evidence id must resolve.
std::vector<ClaimRecord> ingest_claims(std::istream& in, const PageStore* store = nullptr);
std::vector<ClaimRecord> load_claims(const std::string& path, const PageStore* store = nullptr);
void write_claims(std::ostream& out, const std::vector<ClaimRecord>& claims);

struct PairCount {
  std::string first;
  std::string second;
  std::size_t count = 0;
};

struct CensusReport {
  std::size_t claims = 0;
  std::size_t evidence_sets = 0;
  // Fraction of evidence sets containing at least one item of each type:
  // "sentence", "table_caption", "cell", "header_cell", "list_item",
  // "table" (any cell or caption), "infobox", "general_table".
  std::map<std::string, double> type_fraction;
  // Page-local id pairs ("cell_0_2_1", "sentence_0"), counted within
  // individual evidence sets and within per-claim unions.
  std::vector<PairCount> set_pairs;
  std::vector<PairCount> union_pairs;
};

CensusReport corpus_census(const PageStore& store, const std::vector<ClaimRecord>& claims,
                           std::size_t top_n = 10);

}  // namespace evgraph
