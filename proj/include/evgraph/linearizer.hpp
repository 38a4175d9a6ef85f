#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evgraph/corpus.hpp"

namespace evgraph {

// Rendered in place of an empty cell so the id stays addressable.
inline constexpr std::string_view kEmptyCellText = "(empty)";

// Declared kind when present; otherwise infobox iff the table has exactly two
// columns and every data row (a row that is not all headers) starts with a
// header cell.
TableKind classify_table(const Table& table, const SpanGrid& grid);
TableKind classify_table(const Table& table);

struct HeaderContext {
  std::optional<std::string> row_header;           // text of (r, 0)
  std::optional<std::string> column_header;        // nearest header above in column c
  std::optional<std::string> first_column_header;  // nearest header above in column 0
};

// Throws StructureError when (r, c) lies outside the grid.
HeaderContext resolve_headers(const SpanGrid& grid, int r, int c);

struct LinearizationContext {
  std::string table_name;  // caption if present, else page title
  std::string page_title;
  std::optional<std::string> row_header;
  std::optional<std::string> column_header;
  std::optional<std::string> first_column_header;
  std::optional<std::string> section_header;  // infobox full-width header row above
  std::vector<std::string> list_subheaders;
};

LinearizationContext linearization_context(const PageStore& store, const ElementId& id);

// One contextualized sentence per element. Throws NotFoundError when the id
// does not resolve.
std::string linearize(const PageStore& store, const ElementId& id);

}  // namespace evgraph
