#include "evgraph/linearizer.hpp"

#include "evgraph/errors.hpp"
#include "evgraph/text.hpp"

namespace evgraph {
namespace {

bool same_source(const SpanGrid::Slot& a, const SpanGrid::Slot& b) {
  return a.anchor_row == b.anchor_row && a.anchor_col == b.anchor_col;
}

std::optional<std::string> non_empty(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

// Nearest header strictly above (r, c) in column c that is not the cell itself.
std::optional<std::string> header_above(const SpanGrid& grid, int r, int c) {
  const auto& self = grid.at(r, c);
  for (int rr = r - 1; rr >= 0; --rr) {
    const auto& slot = grid.at(rr, c);
    if (same_source(slot, self)) continue;
    if (slot.cell.is_header) return non_empty(slot.cell.text);
  }
  return std::nullopt;
}

bool is_full_width_header_row(const SpanGrid& grid, int r) {
  if (grid.cols() == 0) return false;
  const auto& first = grid.at(r, 0);
  if (!first.cell.is_header) return false;
  for (int c = 1; c < grid.cols(); ++c)
    if (!same_source(grid.at(r, c), first)) return false;
  return true;
}

std::optional<std::string> section_above(const SpanGrid& grid, int r, int c) {
  const auto& self = grid.at(r, c);
  for (int rr = r - 1; rr >= 0; --rr) {
    if (same_source(grid.at(rr, c), self)) continue;
    if (is_full_width_header_row(grid, rr)) return non_empty(grid.at(rr, 0).cell.text);
  }
  return std::nullopt;
}

std::string cell_text(const std::string& s) { return s.empty() ? std::string(kEmptyCellText) : s; }

std::string finish(std::string s) {
  if (!text::ends_with(s, ".")) s += '.';
  return s;
}

std::string table_name(const Page& page, int table) {
  const auto& caption = page.tables[static_cast<std::size_t>(table)].caption;
  if (caption && !caption->empty()) return *caption;
  return page.page_id;
}

}  // namespace

TableKind classify_table(const Table& table, const SpanGrid& grid) {
  if (table.declared_kind) return *table.declared_kind;
  if (grid.cols() != 2) return TableKind::kGeneral;
  bool any_data_row = false;
  for (int r = 0; r < grid.rows(); ++r) {
    bool all_header = true;
    for (int c = 0; c < grid.cols(); ++c) all_header = all_header && grid.at(r, c).cell.is_header;
    if (all_header) continue;
    any_data_row = true;
    if (!grid.at(r, 0).cell.is_header) return TableKind::kGeneral;
  }
  return any_data_row ? TableKind::kInfobox : TableKind::kGeneral;
}

TableKind classify_table(const Table& table) {
  if (table.declared_kind) return *table.declared_kind;
  return classify_table(table, expand_spans(table));
}

HeaderContext resolve_headers(const SpanGrid& grid, int r, int c) {
  if (!grid.contains(r, c)) {
    throw StructureError("position (" + std::to_string(r) + ", " + std::to_string(c) +
                         ") outside a " + std::to_string(grid.rows()) + "x" +
                         std::to_string(grid.cols()) + " grid");
  }
  HeaderContext ctx;
  ctx.row_header = non_empty(grid.at(r, 0).cell.text);
  ctx.column_header = header_above(grid, r, c);
  ctx.first_column_header = header_above(grid, r, 0);
  return ctx;
}

LinearizationContext linearization_context(const PageStore& store, const ElementId& id) {
  const Element element = resolve(store, id);
  const Page& page = store.page(id.page);
  LinearizationContext ctx;
  ctx.page_title = page.page_id;
  ctx.table_name = page.page_id;
  if (element.table >= 0) ctx.table_name = table_name(page, element.table);
  if (id.is_cell_kind()) {
    const SpanGrid& grid = store.grid(id.page, element.table);
    const HeaderContext h = resolve_headers(grid, element.row, element.col);
    ctx.row_header = h.row_header;
    ctx.column_header = h.column_header;
    ctx.first_column_header = h.first_column_header;
    ctx.section_header = section_above(grid, element.row, element.col);
  }
  if (id.kind == ElementKind::kItem) {
    ctx.list_subheaders = page.lists[static_cast<std::size_t>(element.list)].subheaders;
  }
  return ctx;
}

std::string linearize(const PageStore& store, const ElementId& id) {
  const Element element = resolve(store, id);
  const LinearizationContext ctx = linearization_context(store, id);

  switch (id.kind) {
    case ElementKind::kSentence:
    case ElementKind::kTableCaption:
      return ctx.page_title + " : " + element.text;

    case ElementKind::kItem: {
      if (ctx.list_subheaders.empty()) return finish(ctx.page_title + " includes " + element.text);
      std::string subheaders;
      for (const auto& s : ctx.list_subheaders) {
        if (!subheaders.empty()) subheaders += ", ";
        subheaders += s;
      }
      return finish(subheaders + " for " + ctx.page_title + " includes " + element.text);
    }

    case ElementKind::kCell:
    case ElementKind::kHeaderCell: {
      const Page& page = store.page(id.page);
      const Table& table = page.tables[static_cast<std::size_t>(element.table)];
      const TableKind kind = classify_table(table, store.grid(id.page, element.table));
      const std::string cell = cell_text(element.text);
      const bool header = id.kind == ElementKind::kHeaderCell;

      if (kind == TableKind::kInfobox) {
        const std::string in_section = ctx.section_header ? " in " + *ctx.section_header : "";
        if (header) return finish(ctx.table_name + " has " + cell + in_section);
        const std::string label = ctx.row_header.value_or(std::string(kEmptyCellText));
        return finish(label + " of " + ctx.table_name + in_section + " is " + cell);
      }

      if (header) {
        const std::string in_sub = ctx.column_header ? " in " + *ctx.column_header : "";
        return finish(ctx.table_name + " has " + cell + in_sub);
      }
      std::string out = ctx.table_name + " has";
      if (ctx.first_column_header) out += " " + *ctx.first_column_header;
      out += " " + ctx.row_header.value_or(std::string(kEmptyCellText));
      if (ctx.column_header) out += " in " + *ctx.column_header;
      out += " of " + cell;
      return finish(out);
    }
  }
  return element.text;
}

}  // namespace evgraph
