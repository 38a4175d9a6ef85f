#include "evgraph/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "evgraph/errors.hpp"
#include "json.hpp"

namespace evgraph {

using nlohmann::json;

std::string_view kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::kSentence:
      return "sentence";
    case ElementKind::kCell:
      return "cell";
    case ElementKind::kHeaderCell:
      return "header_cell";
    case ElementKind::kItem:
      return "item";
    case ElementKind::kTableCaption:
      return "table_caption";
  }
  return "?";
}

int index_arity(ElementKind kind) {
  switch (kind) {
    case ElementKind::kCell:
    case ElementKind::kHeaderCell:
      return 3;
    case ElementKind::kItem:
      return 2;
    default:
      return 1;
  }
}

ElementId ElementId::sentence(std::string page, int s) {
  return {std::move(page), ElementKind::kSentence, {s, 0, 0}};
}

ElementId ElementId::cell(std::string page, int table, int row, int col, bool header) {
  return {std::move(page), header ? ElementKind::kHeaderCell : ElementKind::kCell, {table, row, col}};
}

ElementId ElementId::item(std::string page, int list, int item) {
  return {std::move(page), ElementKind::kItem, {list, item, 0}};
}

ElementId ElementId::caption(std::string page, int table) {
  return {std::move(page), ElementKind::kTableCaption, {table, 0, 0}};
}

std::string ElementId::local_str() const {
  std::string out(kind_name(kind));
  for (int i = 0; i < index_arity(kind); ++i) {
    out += '_';
    out += std::to_string(index[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string ElementId::str() const { return page + "_" + local_str(); }

std::size_t ElementIdHash::operator()(const ElementId& id) const {
  std::size_t h = std::hash<std::string>{}(id.page);
  h = h * 31 + static_cast<std::size_t>(id.kind);
  for (int v : id.index) h = h * 1000003u + static_cast<std::size_t>(v);
  return h;
}

namespace {

bool parse_index(std::string_view seg, int& out) {
  if (seg.empty()) return false;
  for (char ch : seg)
    if (ch < '0' || ch > '9') return false;
  auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), out);
  return ec == std::errc() && ptr == seg.data() + seg.size();
}

}  // namespace

ElementId parse_element_id(std::string_view s) {
  if (s.empty()) throw ParseError("empty element id");

  // Split on '_' and walk back over trailing numeric segments to the kind keyword.
  std::vector<std::string_view> segs;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '_') {
      segs.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }

  std::vector<int> indices;
  std::size_t k = segs.size();
  while (k > 0) {
    int v = 0;
    if (!parse_index(segs[k - 1], v)) break;
    indices.insert(indices.begin(), v);
    --k;
  }
  if (k == 0) throw ParseError("element id '" + std::string(s) + "' has no kind segment");

  const std::string_view keyword = segs[k - 1];
  ElementKind kind;
  std::size_t page_segments = k - 1;
  if (keyword == "sentence") {
    kind = ElementKind::kSentence;
  } else if (keyword == "item") {
    kind = ElementKind::kItem;
  } else if (keyword == "cell") {
    kind = ElementKind::kCell;
    if (page_segments >= 1 && segs[page_segments - 1] == "header") {
      kind = ElementKind::kHeaderCell;
      --page_segments;
    }
  } else if (keyword == "caption" && page_segments >= 1 && segs[page_segments - 1] == "table") {
    kind = ElementKind::kTableCaption;
    --page_segments;
  } else {
    throw ParseError("element id '" + std::string(s) + "': unknown kind segment '" +
                     std::string(keyword) + "'");
  }

  const int arity = index_arity(kind);
  if (static_cast<int>(indices.size()) != arity) {
    throw ParseError("element id '" + std::string(s) + "': " + std::string(kind_name(kind)) +
                     " requires " + std::to_string(arity) + " indices, got " +
                     std::to_string(indices.size()));
  }
  if (page_segments == 0) throw ParseError("element id '" + std::string(s) + "': empty page segment");

  // Page is everything before the kind keyword, underscores included.
  std::size_t page_len = 0;
  for (std::size_t i = 0; i < page_segments; ++i) page_len += segs[i].size() + (i > 0 ? 1 : 0);
  ElementId id;
  id.page = std::string(s.substr(0, page_len));
  id.kind = kind;
  for (int i = 0; i < arity; ++i) id.index[static_cast<std::size_t>(i)] = indices[static_cast<std::size_t>(i)];
  return id;
}

std::string_view table_kind_name(TableKind kind) {
  return kind == TableKind::kInfobox ? "infobox" : "general";
}

SpanGrid::SpanGrid(int rows, int cols, std::vector<Slot> slots)
    : rows_(rows), cols_(cols), slots_(std::move(slots)) {}

SpanGrid expand_spans(const Table& table) {
  const int n_rows = static_cast<int>(table.rows.size());
  std::vector<std::vector<std::optional<SpanGrid::Slot>>> grid(static_cast<std::size_t>(n_rows));

  auto place = [&](int r, int c, const SpanGrid::Slot& slot) {
    if (r >= n_rows) {
      throw StructureError("table " + std::to_string(table.index) + ": row span of cell at (" +
                           std::to_string(slot.anchor_row) + ", " + std::to_string(slot.anchor_col) +
                           ") runs past the last row");
    }
    auto& row = grid[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) <= c) row.resize(static_cast<std::size_t>(c) + 1);
    if (row[static_cast<std::size_t>(c)]) {
      throw StructureError("table " + std::to_string(table.index) + ": overlapping spans at (" +
                           std::to_string(r) + ", " + std::to_string(c) + ")");
    }
    row[static_cast<std::size_t>(c)] = slot;
  };

  for (int r = 0; r < n_rows; ++r) {
    int c = 0;
    for (const Cell& cell : table.rows[static_cast<std::size_t>(r)]) {
      if (cell.row_span < 1 || cell.col_span < 1) {
        throw StructureError("table " + std::to_string(table.index) + ": non-positive span in row " +
                             std::to_string(r));
      }
      const auto& row = grid[static_cast<std::size_t>(r)];
      while (c < static_cast<int>(row.size()) && row[static_cast<std::size_t>(c)]) ++c;
      const SpanGrid::Slot slot{cell, r, c};
      for (int dr = 0; dr < cell.row_span; ++dr)
        for (int dc = 0; dc < cell.col_span; ++dc) place(r + dr, c + dc, slot);
      c += cell.col_span;
    }
  }

  const int n_cols = n_rows == 0 ? 0 : static_cast<int>(grid[0].size());
  std::vector<SpanGrid::Slot> slots;
  slots.reserve(static_cast<std::size_t>(n_rows * n_cols));
  for (int r = 0; r < n_rows; ++r) {
    const auto& row = grid[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != n_cols) {
      throw StructureError("table " + std::to_string(table.index) + ": row " + std::to_string(r) +
                           " has " + std::to_string(row.size()) + " columns after span expansion, expected " +
                           std::to_string(n_cols));
    }
    for (int c = 0; c < n_cols; ++c) {
      if (!row[static_cast<std::size_t>(c)]) {
        throw StructureError("table " + std::to_string(table.index) + ": hole at (" +
                             std::to_string(r) + ", " + std::to_string(c) + ")");
      }
      slots.push_back(*row[static_cast<std::size_t>(c)]);
    }
  }
  return SpanGrid(n_rows, n_cols, std::move(slots));
}

void PageStore::add(Page page) {
  if (page.page_id.empty()) throw DataError("page with empty page_id");
  if (index_.contains(page.page_id)) throw DataError("duplicate page_id '" + page.page_id + "'");
  std::vector<SpanGrid> grids;
  for (std::size_t t = 0; t < page.tables.size(); ++t) {
    page.tables[t].index = static_cast<int>(t);
    grids.push_back(expand_spans(page.tables[t]));
  }
  index_.emplace(page.page_id, pages_.size());
  pages_.push_back(std::move(page));
  grids_.push_back(std::move(grids));
}

bool PageStore::contains(std::string_view page_id) const {
  return index_.contains(std::string(page_id));
}

const Page* PageStore::find(std::string_view page_id) const {
  auto it = index_.find(std::string(page_id));
  return it == index_.end() ? nullptr : &pages_[it->second];
}

std::size_t PageStore::position(std::string_view page_id) const {
  auto it = index_.find(std::string(page_id));
  if (it == index_.end())
    throw NotFoundError(NotFoundError::Reason::kPage, "unknown page '" + std::string(page_id) + "'");
  return it->second;
}

const Page& PageStore::page(std::string_view page_id) const { return pages_[position(page_id)]; }

const SpanGrid& PageStore::grid(std::string_view page_id, int table) const {
  const auto& grids = grids_[position(page_id)];
  if (table < 0 || table >= static_cast<int>(grids.size())) {
    throw NotFoundError(NotFoundError::Reason::kIndex,
                        "page '" + std::string(page_id) + "' has no table " + std::to_string(table));
  }
  return grids[static_cast<std::size_t>(table)];
}

std::vector<ElementId> PageStore::elements(const Page& page) const {
  std::vector<ElementId> out;
  for (std::size_t s = 0; s < page.sentences.size(); ++s)
    out.push_back(ElementId::sentence(page.page_id, static_cast<int>(s)));
  const auto& grids = grids_[position(page.page_id)];
  for (std::size_t t = 0; t < page.tables.size(); ++t) {
    const int ti = static_cast<int>(t);
    if (page.tables[t].caption) out.push_back(ElementId::caption(page.page_id, ti));
    const SpanGrid& g = grids[t];
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c)
        if (g.is_anchor(r, c)) out.push_back(ElementId::cell(page.page_id, ti, r, c, g.at(r, c).cell.is_header));
  }
  for (std::size_t l = 0; l < page.lists.size(); ++l)
    for (std::size_t i = 0; i < page.lists[l].items.size(); ++i)
      out.push_back(ElementId::item(page.page_id, static_cast<int>(l), static_cast<int>(i)));
  return out;
}

std::vector<ElementId> PageStore::all_elements() const {
  std::vector<ElementId> out;
  for (const Page& p : pages_) {
    auto ids = elements(p);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

Element resolve(const PageStore& store, const ElementId& id) {
  const Page& page = store.page(id.page);
  auto out_of_range = [&]() {
    return NotFoundError(NotFoundError::Reason::kIndex, "index out of range in '" + id.str() + "'");
  };
  Element e;
  e.id = id;
  const auto [a, b, c] = id.index;
  switch (id.kind) {
    case ElementKind::kSentence:
      if (a < 0 || a >= static_cast<int>(page.sentences.size())) throw out_of_range();
      e.text = page.sentences[static_cast<std::size_t>(a)];
      break;
    case ElementKind::kTableCaption:
      if (a < 0 || a >= static_cast<int>(page.tables.size())) throw out_of_range();
      if (!page.tables[static_cast<std::size_t>(a)].caption) {
        throw NotFoundError(NotFoundError::Reason::kIndex, "table has no caption: '" + id.str() + "'");
      }
      e.text = *page.tables[static_cast<std::size_t>(a)].caption;
      e.table = a;
      break;
    case ElementKind::kCell:
    case ElementKind::kHeaderCell: {
      if (a < 0 || a >= static_cast<int>(page.tables.size())) throw out_of_range();
      const SpanGrid& g = store.grid(id.page, a);
      if (!g.contains(b, c)) throw out_of_range();
      const Cell& cell = g.at(b, c).cell;
      if (cell.is_header != (id.kind == ElementKind::kHeaderCell)) {
        throw NotFoundError(NotFoundError::Reason::kKind,
                            "'" + id.str() + "' addresses a " + (cell.is_header ? "header" : "non-header") +
                                " cell");
      }
      e.text = cell.text;
      e.table = a;
      e.row = b;
      e.col = c;
      break;
    }
    case ElementKind::kItem: {
      if (a < 0 || a >= static_cast<int>(page.lists.size())) throw out_of_range();
      const auto& items = page.lists[static_cast<std::size_t>(a)].items;
      if (b < 0 || b >= static_cast<int>(items.size())) throw out_of_range();
      e.text = items[static_cast<std::size_t>(b)].text;
      e.depth = items[static_cast<std::size_t>(b)].depth;
      e.list = a;
      e.row = b;
      break;
    }
  }
  return e;
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kSupports:
      return "SUPPORTS";
    case Label::kRefutes:
      return "REFUTES";
    case Label::kNei:
      return "NOT ENOUGH INFO";
  }
  return "?";
}

Label parse_label(std::string_view s) {
  if (s == "SUPPORTS") return Label::kSupports;
  if (s == "REFUTES") return Label::kRefutes;
  if (s == "NOT ENOUGH INFO") return Label::kNei;
  throw ParseError("unknown label '" + std::string(s) + "'");
}

std::vector<ElementId> ClaimRecord::evidence_union() const {
  std::vector<ElementId> out;
  for (const auto& set : evidence_sets) out.insert(out.end(), set.begin(), set.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

template <typename T>
T require(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw IngestError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw IngestError(line, std::string("field '") + key + "' has the wrong type");
  }
}

Page page_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw IngestError(line, "record is not an object");
  Page page;
  page.page_id = require<std::string>(j, "page_id", line);
  if (page.page_id.empty()) throw IngestError(line, "empty page_id");
  if (j.contains("sentences")) page.sentences = require<std::vector<std::string>>(j, "sentences", line);

  if (j.contains("tables")) {
    const json& tables = j.at("tables");
    if (!tables.is_array()) throw IngestError(line, "'tables' is not an array");
    for (const json& jt : tables) {
      Table t;
      t.index = static_cast<int>(page.tables.size());
      if (jt.contains("caption") && !jt.at("caption").is_null()) t.caption = require<std::string>(jt, "caption", line);
      if (jt.contains("kind") && !jt.at("kind").is_null()) {
        const auto kind = require<std::string>(jt, "kind", line);
        if (kind == "infobox") {
          t.declared_kind = TableKind::kInfobox;
        } else if (kind == "general") {
          t.declared_kind = TableKind::kGeneral;
        } else {
          throw IngestError(line, "unknown table kind '" + kind + "'");
        }
      }
      if (!jt.contains("rows") || !jt.at("rows").is_array()) throw IngestError(line, "table without 'rows' array");
      for (const json& jr : jt.at("rows")) {
        if (!jr.is_array()) throw IngestError(line, "table row is not an array");
        std::vector<Cell> row;
        for (const json& jc : jr) {
          Cell cell;
          cell.text = require<std::string>(jc, "text", line);
          if (jc.contains("row_span")) cell.row_span = require<int>(jc, "row_span", line);
          if (jc.contains("col_span")) cell.col_span = require<int>(jc, "col_span", line);
          if (jc.contains("is_header")) cell.is_header = require<bool>(jc, "is_header", line);
          if (cell.row_span < 1 || cell.col_span < 1) throw IngestError(line, "cell span must be >= 1");
          row.push_back(std::move(cell));
        }
        t.rows.push_back(std::move(row));
      }
      page.tables.push_back(std::move(t));
    }
  }

  if (j.contains("lists")) {
    const json& lists = j.at("lists");
    if (!lists.is_array()) throw IngestError(line, "'lists' is not an array");
    for (const json& jl : lists) {
      ListBlock block;
      if (jl.contains("subheaders")) block.subheaders = require<std::vector<std::string>>(jl, "subheaders", line);
      if (!jl.contains("items") || !jl.at("items").is_array()) throw IngestError(line, "list without 'items' array");
      for (const json& ji : jl.at("items")) {
        ListItem item;
        item.text = require<std::string>(ji, "text", line);
        if (ji.contains("depth")) item.depth = require<int>(ji, "depth", line);
        if (item.depth < 0) throw IngestError(line, "negative list depth");
        block.items.push_back(std::move(item));
      }
      page.lists.push_back(std::move(block));
    }
  }
  return page;
}

json page_to_json(const Page& page) {
  json tables = json::array();
  for (const Table& t : page.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (const Cell& c : row)
        jr.push_back({{"text", c.text}, {"row_span", c.row_span}, {"col_span", c.col_span}, {"is_header", c.is_header}});
      rows.push_back(std::move(jr));
    }
    json jt = {{"caption", t.caption ? json(*t.caption) : json(nullptr)}, {"rows", std::move(rows)}};
    if (t.declared_kind) jt["kind"] = std::string(table_kind_name(*t.declared_kind));
    tables.push_back(std::move(jt));
  }
  json lists = json::array();
  for (const ListBlock& l : page.lists) {
    json items = json::array();
    for (const ListItem& i : l.items) items.push_back({{"text", i.text}, {"depth", i.depth}});
    lists.push_back({{"subheaders", l.subheaders}, {"items", std::move(items)}});
  }
  return {{"page_id", page.page_id}, {"sentences", page.sentences}, {"tables", std::move(tables)}, {"lists", std::move(lists)}};
}

template <typename F>
void for_each_record(std::istream& in, F&& f) {
  std::string buffer;
  std::size_t line = 0;
  while (std::getline(in, buffer)) {
    ++line;
    if (buffer.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(buffer);
    } catch (const json::parse_error& e) {
      throw IngestError(line, std::string("invalid JSON: ") + e.what());
    }
    f(j, line);
  }
}

}  // namespace

PageStore ingest_pages(PageSource& source) {
  PageStore store;
  while (auto page = source.next()) store.add(std::move(*page));
  return store;
}

PageStore ingest_corpus(std::istream& in) {
  PageStore store;
  for_each_record(in, [&](const json& j, std::size_t line) {
    Page page = page_from_json(j, line);
    try {
      store.add(std::move(page));
    } catch (const DataError& e) {
      throw IngestError(line, e.what());
    }
  });
  return store;
}

PageStore load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file '" + path + "'");
  return ingest_corpus(in);
}

void write_corpus(std::ostream& out, const PageStore& store) {
  for (const Page& p : store.pages()) out << page_to_json(p).dump() << '\n';
}

std::vector<ClaimRecord> ingest_claims(std::istream& in, const PageStore* store) {
  std::vector<ClaimRecord> claims;
  for_each_record(in, [&](const json& j, std::size_t line) {
    if (!j.is_object()) throw IngestError(line, "record is not an object");
    ClaimRecord rec;
    rec.claim_id = require<std::int64_t>(j, "id", line);
    rec.claim = require<std::string>(j, "claim", line);
    try {
      rec.label = parse_label(require<std::string>(j, "label", line));
    } catch (const ParseError& e) {
      throw IngestError(line, e.what());
    }
    if (j.contains("evidence")) {
      for (const auto& set : require<std::vector<std::vector<std::string>>>(j, "evidence", line)) {
        std::vector<ElementId> ids;
        for (const auto& s : set) {
          try {
            ids.push_back(parse_element_id(s));
            if (store) resolve(*store, ids.back());
          } catch (const DataError& e) {
            throw IngestError(line, e.what());
          }
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        rec.evidence_sets.push_back(std::move(ids));
      }
    }
    claims.push_back(std::move(rec));
  });
  return claims;
}

std::vector<ClaimRecord> load_claims(const std::string& path, const PageStore* store) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open claims file '" + path + "'");
  return ingest_claims(in, store);
}

void write_claims(std::ostream& out, const std::vector<ClaimRecord>& claims) {
  for (const auto& c : claims) {
    json sets = json::array();
    for (const auto& set : c.evidence_sets) {
      json js = json::array();
      for (const auto& id : set) js.push_back(id.str());
      sets.push_back(std::move(js));
    }
    out << json{{"id", c.claim_id}, {"claim", c.claim}, {"label", std::string(label_name(c.label))}, {"evidence", std::move(sets)}}
               .dump()
        << '\n';
  }
}

}  // namespace evgraph
