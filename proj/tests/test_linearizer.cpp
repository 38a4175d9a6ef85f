#include "doctest.h"
#include "evgraph/errors.hpp"
#include "evgraph/linearizer.hpp"
#include "support.hpp"

using namespace evgraph;

namespace {

const PageStore& templates() {
  static const PageStore store = load_corpus(testing::fixture("templates_corpus.jsonl"));
  return store;
}

std::string lin(const std::string& id) { return linearize(templates(), parse_element_id(id)); }

Table table_of(std::vector<std::vector<Cell>> rows) {
  Table t;
  t.rows = std::move(rows);
  return t;
}

}  // namespace

TEST_SUITE("linearizer") {
  TEST_CASE("template examples") {
    CHECK(lin("Brewster Productions_header_cell_0_0_0") == "Brewster Productions has Genres.");
    CHECK(lin("Barbora Krejčíková_cell_0_3_1") ==
          "Current ranking of Barbora Krejčíková in Singles is No. 65 (16 November 2020).");
    CHECK(lin("2014 Ladies European Tour_cell_0_3_1") ==
          "2014 Ladies European Tour has Rank 9 in Player of Florentyna Parker.");
    CHECK(lin("United States Senate election in Maine, 1964_header_cell_0_0_0") ==
          "The 1964 United States Senate election in Maine has Party.");
    CHECK(lin("Park Sang-in_item_0_0") == "The Player Honours for Park Sang-in includes K-League Best XI: 1985.");
    CHECK(lin("Site_item_0_0") == "Site includes Location, a point or an area on the Earth's surface or elsewhere.");
  }

  TEST_CASE("sentences and captions join the title with a spaced colon") {
    CHECK(lin("Brewster Productions_sentence_1") == "Brewster Productions : It was founded in 1998 in Los Angeles.");
    CHECK(lin("United States Senate election in Maine, 1964_table_caption_0") ==
          "United States Senate election in Maine, 1964 : The 1964 United States Senate election in Maine");
  }

  TEST_CASE("classify_table") {
    Table declared = table_of({{Cell{"a"}, Cell{"b"}, Cell{"c"}}});
    declared.declared_kind = TableKind::kInfobox;
    CHECK(classify_table(declared) == TableKind::kInfobox);

    const Table two_col = table_of({{Cell{"Genres", 1, 1, true}, Cell{"Comedy"}}, {Cell{"Founded", 1, 1, true}, Cell{"1998"}}});
    CHECK(classify_table(two_col) == TableKind::kInfobox);

    const Table wide = table_of({{Cell{"Rank", 1, 1, true}, Cell{"Player", 1, 1, true}, Cell{"Country", 1, 1, true}},
                                 {Cell{"1"}, Cell{"Hull"}, Cell{"England"}}});
    CHECK(classify_table(wide) == TableKind::kGeneral);

    const Table no_row_headers = table_of({{Cell{"a"}, Cell{"b"}}, {Cell{"c"}, Cell{"d"}}});
    CHECK(classify_table(no_row_headers) == TableKind::kGeneral);
  }

  TEST_CASE("nearest-header resolution on the complex table") {
    const SpanGrid& g = templates().grid("Elias Carioca", 0);
    const auto serie_c = resolve_headers(g, 2, 2);
    CHECK(serie_c.column_header == "Division");
    CHECK(serie_c.row_header == "Santa Cruz");
    CHECK(serie_c.first_column_header == "Club");

    CHECK_FALSE(resolve_headers(g, 0, 2).column_header.has_value());
    CHECK(resolve_headers(g, 1, 3).column_header == "League");

    const auto season = resolve_headers(g, 4, 1);
    CHECK(season.column_header == "Season");
    CHECK(season.row_header == "Athletico Paranaense");

    CHECK(resolve_headers(g, 5, 3).column_header == "Apps");
    CHECK(resolve_headers(g, 6, 4).row_header == "Guarani (loan)");
    CHECK_THROWS_AS(resolve_headers(g, 7, 0), StructureError);
  }

  TEST_CASE("ladies tour header context") {
    const auto h = resolve_headers(templates().grid("2014 Ladies European Tour", 0), 3, 1);
    CHECK(h.column_header == "Player");
    CHECK(h.first_column_header == "Rank");
    CHECK(h.row_header == "9");
  }

  TEST_CASE("totality, content and context inclusion") {
    for (const Page& page : templates().pages()) {
      for (const ElementId& id : templates().elements(page)) {
        const std::string out = linearize(templates(), id);
        const Element e = resolve(templates(), id);
        const std::string text = e.text.empty() ? std::string(kEmptyCellText) : e.text;
        CHECK_MESSAGE(out.find(text) != std::string::npos, id.str());
        if (id.is_cell_kind()) {
          const auto ctx = linearization_context(templates(), id);
          CHECK(!ctx.table_name.empty());
          CHECK((out.find(ctx.table_name) != std::string::npos || out.find(page.page_id) != std::string::npos));
        }
        CHECK(linearize(templates(), id) == out);
      }
    }
  }

  TEST_CASE("empty cells render a placeholder") {
    const auto store = testing::store_from(
        R"({"page_id":"T","tables":[{"kind":"general","rows":[[{"text":"A","is_header":true},{"text":"B","is_header":true}],[{"text":"x"},{"text":""}]]}]})");
    CHECK(linearize(store, ElementId::cell("T", 0, 1, 1)) == "T has A x in B of (empty).");
  }

  TEST_CASE("unknown ids raise not-found") {
    CHECK_THROWS_AS(lin("Nowhere_cell_0_0_0"), NotFoundError);
    CHECK_THROWS_AS(lin("Site_item_0_9"), NotFoundError);
  }
}
