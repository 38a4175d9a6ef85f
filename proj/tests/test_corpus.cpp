#include <set>
#include <sstream>

#include "doctest.h"
#include "evgraph/corpus.hpp"
#include "evgraph/errors.hpp"
#include "support.hpp"

using namespace evgraph;

TEST_SUITE("corpus") {
  TEST_CASE("element ids parse and render") {
    const ElementId a = parse_element_id("Scomadi_cell_0_0_1");
    CHECK(a.page == "Scomadi");
    CHECK(a.kind == ElementKind::kCell);
    CHECK(a.index == std::array<int, 3>{0, 0, 1});

    const ElementId s = parse_element_id("Scomadi_sentence_14");
    CHECK(s.kind == ElementKind::kSentence);
    CHECK(s.index[0] == 14);

    CHECK_THROWS_AS(parse_element_id("X_cell_0_0"), ParseError);
    CHECK_THROWS_AS(parse_element_id(""), ParseError);
    CHECK_THROWS_AS(parse_element_id("X_sentence_a"), ParseError);
  }

  TEST_CASE("page titles containing kind words and underscores round-trip") {
    for (const char* s : {"A_b_sentence_3", "Elias Carioca_header_cell_0_1_2", "Page_cell_3_item_2_5",
                          "2014 Ladies European Tour_table_caption_0", "x_sentence_1_cell_0_0_0"}) {
      CHECK(parse_element_id(s).str() == s);
    }
    const ElementId h = parse_element_id("Elias Carioca_header_cell_0_1_2");
    CHECK(h.page == "Elias Carioca");
    CHECK(h.kind == ElementKind::kHeaderCell);
  }

  TEST_CASE("round-trip over random ids") {
    Rng rng(5);
    const ElementKind kinds[] = {ElementKind::kSentence, ElementKind::kCell, ElementKind::kHeaderCell, ElementKind::kItem,
                                 ElementKind::kTableCaption};
    for (int trial = 0; trial < 500; ++trial) {
      ElementId id;
      id.page = "P_" + std::to_string(rng.below(100)) + (rng.below(2) ? "_cell" : " x");
      id.kind = kinds[rng.below(5)];
      for (int k = 0; k < index_arity(id.kind); ++k) id.index[static_cast<std::size_t>(k)] = static_cast<int>(rng.below(40));
      CHECK(parse_element_id(id.str()) == id);
    }
  }

  TEST_CASE("ingest enumerates elements in a fixed order") {
    CHECK(testing::store_from("").empty());
    const auto store = testing::store_from(
        R"({"page_id":"A","sentences":["s0","s1"],"tables":[{"caption":"cap","rows":[[{"text":"h","is_header":true},{"text":"x"}]]}],"lists":[{"items":[{"text":"i0"}]}]})"
        "\n");
    std::vector<std::string> ids;
    for (const auto& id : store.all_elements()) ids.push_back(id.str());
    CHECK(ids == std::vector<std::string>{"A_sentence_0", "A_sentence_1", "A_table_caption_0", "A_header_cell_0_0_0",
                                          "A_cell_0_0_1", "A_item_0_0"});
  }

  TEST_CASE("ingest errors carry line numbers") {
    const std::string dup = "{\"page_id\":\"A\"}\n\n{\"page_id\":\"A\"}\n";
    try {
      testing::store_from(dup);
      FAIL("expected an ingest error");
    } catch (const IngestError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(testing::store_from("{\"page_id\":\"A\"}\nnot json\n"), IngestError);
    CHECK_THROWS_AS(testing::store_from("{\"sentences\":[]}\n"), IngestError);
    CHECK_THROWS_AS(testing::store_from(R"({"page_id":"A","tables":[{"kind":"chart","rows":[]}]})"), IngestError);
  }

  TEST_CASE("span expansion") {
    Table one;
    one.rows = {{Cell{"x"}}};
    const SpanGrid g1 = expand_spans(one);
    CHECK(g1.rows() == 1);
    CHECK(g1.cols() == 1);
    CHECK(g1.at(0, 0).cell.text == "x");

    Table overflow;
    overflow.rows = {{Cell{"a", 1, 3}, Cell{"b"}}, {Cell{"c"}, Cell{"d"}}};
    CHECK_THROWS_AS(expand_spans(overflow), StructureError);

    Table ragged;
    ragged.rows = {{Cell{"a"}, Cell{"b"}}, {Cell{"c"}}};
    CHECK_THROWS_AS(expand_spans(ragged), StructureError);

    Table past_end;
    past_end.rows = {{Cell{"a", 2, 1}, Cell{"b"}}};
    CHECK_THROWS_AS(expand_spans(past_end), StructureError);
  }

  TEST_CASE("complex table spans land on every covered position") {
    const PageStore store = load_corpus(testing::fixture("templates_corpus.jsonl"));
    const SpanGrid& g = store.grid("Elias Carioca", 0);
    CHECK(g.rows() == 7);
    CHECK(g.cols() == 5);
    for (int r : {3, 4, 5}) {
      CHECK(g.at(r, 0).cell.text == "Athletico Paranaense");
      CHECK(g.at(r, 0).anchor_row == 3);
    }
    CHECK(g.at(2, 0).cell.text == "Santa Cruz");
    CHECK(g.at(0, 4).cell.text == "League");
    CHECK(g.at(1, 0).cell.text == "Club");
    CHECK(g.at(5, 2).cell.text == "Total");
    CHECK_FALSE(g.is_anchor(4, 2));

    // Distinct texts survive expansion unchanged.
    std::set<std::string> authored, expanded;
    for (const auto& row : store.page("Elias Carioca").tables[0].rows)
      for (const auto& c : row) authored.insert(c.text);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) expanded.insert(g.at(r, c).cell.text);
    CHECK(authored == expanded);
  }

  TEST_CASE("resolve") {
    const auto store = testing::store_from(R"({"page_id":"A","sentences":["first"],"tables":[{"rows":[[{"text":"h","is_header":true}]]}]})");
    CHECK(resolve(store, ElementId::sentence("A", 0)).text == "first");
    auto reason = [&](const ElementId& id) {
      try {
        resolve(store, id);
      } catch (const NotFoundError& e) {
        return static_cast<int>(e.reason());
      }
      return -1;
    };
    CHECK(reason(parse_element_id("Nowhere_sentence_0")) == static_cast<int>(NotFoundError::Reason::kPage));
    CHECK(reason(ElementId::cell("A", 0, 5, 0)) == static_cast<int>(NotFoundError::Reason::kIndex));
    CHECK(reason(ElementId::cell("A", 0, 0, 0, false)) == static_cast<int>(NotFoundError::Reason::kKind));
    CHECK(reason(ElementId::sentence("A", 1)) == static_cast<int>(NotFoundError::Reason::kIndex));
  }

  TEST_CASE("claims ingest validates evidence against the store") {
    const auto store = testing::store_from(R"({"page_id":"A","sentences":["s"]})");
    std::istringstream good(R"({"id":1,"claim":"c","label":"SUPPORTS","evidence":[["A_sentence_0"]]})");
    const auto claims = ingest_claims(good, &store);
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].label == Label::kSupports);
    std::istringstream bad(R"({"id":1,"claim":"c","label":"SUPPORTS","evidence":[["A_sentence_4"]]})");
    CHECK_THROWS_AS(ingest_claims(bad, &store), DataError);
    std::istringstream label(R"({"id":1,"claim":"c","label":"MAYBE","evidence":[]})");
    CHECK_THROWS_AS(ingest_claims(label), DataError);
  }

  TEST_CASE("corpus and claims writers round-trip") {
    const PageStore store = load_corpus(testing::fixture("mini_corpus.jsonl"));
    std::ostringstream out;
    write_corpus(out, store);
    std::istringstream in(out.str());
    const PageStore again = ingest_corpus(in);
    CHECK(again.all_elements() == store.all_elements());
    std::ostringstream out2;
    write_corpus(out2, again);
    CHECK(out2.str() == out.str());

    const auto claims = load_claims(testing::fixture("mini_claims.jsonl"), &store);
    std::ostringstream c1;
    write_claims(c1, claims);
    std::istringstream cin(c1.str());
    const auto reread = ingest_claims(cin, &store);
    std::ostringstream c2;
    write_claims(c2, reread);
    CHECK(c1.str() == c2.str());
  }

  TEST_CASE("page source adapter") {
    struct Two : PageSource {
      int n = 0;
      std::optional<Page> next() override {
        if (n == 2) return std::nullopt;
        Page p;
        p.page_id = "P" + std::to_string(n++);
        return p;
      }
    } source;
    CHECK(ingest_pages(source).size() == 2);
  }

  TEST_CASE("census") {
    const auto store = testing::store_from(
        R"({"page_id":"A","sentences":["s0","s1"],"tables":[{"kind":"infobox","rows":[[{"text":"h","is_header":true},{"text":"v"}]]}]})");
    ClaimRecord c;
    c.evidence_sets = {{ElementId::sentence("A", 0)}};
    auto r = corpus_census(store, {c});
    CHECK(r.type_fraction.at("sentence") == 1.0);
    CHECK(r.type_fraction.at("table") == 0.0);

    c.evidence_sets = {{ElementId::sentence("A", 0), ElementId::sentence("A", 1)}};
    r = corpus_census(store, {c});
    REQUIRE(r.set_pairs.size() == 1);
    CHECK(r.set_pairs[0].first == "sentence_0");
    CHECK(r.set_pairs[0].second == "sentence_1");
    CHECK(r.set_pairs[0].count == 1);

    // 677 of 1000 sets hold a sentence; the rest hold an infobox cell.
    std::vector<ClaimRecord> many(1000);
    for (int i = 0; i < 1000; ++i)
      many[static_cast<std::size_t>(i)].evidence_sets = {{i < 677 ? ElementId::sentence("A", 0) : ElementId::cell("A", 0, 0, 1)}};
    r = corpus_census(store, many);
    CHECK(r.type_fraction.at("sentence") == doctest::Approx(0.677).epsilon(1e-12));
    CHECK(r.type_fraction.at("infobox") == doctest::Approx(0.323).epsilon(1e-12));
    CHECK(r.type_fraction.at("general_table") == 0.0);
  }
}
