#include <cmath>
#include <numeric>

#include "doctest.h"
#include "evgraph/errors.hpp"
#include "evgraph/pipeline.hpp"
#include "support.hpp"

using namespace evgraph;

namespace {

const char* kOutputs[] = {"corpus.jsonl",       "linearized.jsonl", "retrieval.jsonl", "retrieval_metrics.json",
                          "selection.jsonl",    "augmented.jsonl",  "train_graphs.jsonl", "test_graphs.jsonl",
                          "model.ckpt",         "steps.csv",        "predictions.jsonl",  "metrics.json"};

ModelConfig tiny(Mode mode, int input) {
  ModelConfig c;
  c.mode = mode;
  c.input_dim = input;
  c.hidden = 4;
  c.mlp_hidden = 4;
  c.evidence_hidden = 2;
  return c;
}

bool retrieval_claims_equal(const std::vector<RetrievalResult>& a, const std::vector<RetrievalResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].claim_id != b[i].claim_id || a[i].pages.size() != b[i].pages.size()) return false;
    for (std::size_t j = 0; j < a[i].pages.size(); ++j)
      if (a[i].pages[j].page_id != b[i].pages[j].page_id || a[i].pages[j].score != b[i].pages[j].score) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("end to end run writes every artifact and is reproducible") {
    for (Mode mode : {Mode::kStl, Mode::kMtl}) {
      testing::TempDir a("pipe_a"), b("pipe_b"), c("pipe_c");
      const auto ra = run_pipeline(testing::mini_pipeline(a.path.string(), mode));
      run_pipeline(testing::mini_pipeline(b.path.string(), mode));
      run_pipeline(testing::mini_pipeline(c.path.string(), mode, 4));
      for (const char* name : kOutputs) {
        CAPTURE(name);
        const auto bytes = testing::slurp(a.file(name));
        CHECK_FALSE(bytes.empty());
        CHECK(bytes == testing::slurp(b.file(name)));
        CHECK(bytes == testing::slurp(c.file(name)));
      }
      CHECK(ra.predictions.size() == 10);
      CHECK(ra.metrics.n == 10);
      CHECK(ra.retrieval_recall >= 0.8);
      CHECK(ra.metrics.feverous_score <= std::min(ra.metrics.label_accuracy, ra.metrics.evidence_recall) + 1e-12);
    }
  }

  TEST_CASE("missing inputs fail before any output") {
    testing::TempDir dir("pipe_missing");
    auto cfg = testing::mini_pipeline((dir.path / "out").string(), Mode::kStl);
    cfg.corpus_path = dir.file("nope.jsonl");
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
    CHECK_FALSE(std::filesystem::exists(dir.path / "out"));
  }

  TEST_CASE("stage failures carry the stage name and category") {
    testing::TempDir dir("pipe_stage");
    {
      std::ofstream bad(dir.file("corpus.jsonl"));
      bad << "{\"id\": \"A\"}\n";
    }
    auto cfg = testing::mini_pipeline(dir.file("out"), Mode::kStl);
    cfg.corpus_path = dir.file("corpus.jsonl");
    try {
      run_pipeline(cfg);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).rfind("ingest", 0) == 0);
    }
  }

  TEST_CASE("stages are usable on their own") {
    const auto store = load_corpus(testing::fixture("mini_corpus.jsonl"));
    const auto claims = load_claims(testing::fixture("mini_claims.jsonl"), &store);
    const auto index = DocIndex::build(store);
    ProviderSpec spec;
    spec.dim = 64;
    const auto providers = make_providers(spec);

    const auto retrieval = retrieve_claims(store, index, claims, 3);
    REQUIRE(retrieval.size() == claims.size());
    for (const auto& r : retrieval) CHECK(r.pages.size() <= 3);
    CHECK(retrieval_claims_equal(retrieval, retrieve_claims(store, index, claims, 3, 4)));

    const auto sel = select_evidence(store, claims, retrieval, providers, Mode::kStl, {}, kMtlNodeCap);
    for (const auto& s : sel) {
      std::size_t cells = 0, sentences = 0;
      for (const auto& item : s.items) {
        CHECK(item.id.kind != ElementKind::kHeaderCell);
        CHECK(item.id.kind != ElementKind::kItem);
        cells += item.id.is_cell_kind();
        sentences += item.id.is_sentence_kind();
      }
      CHECK(cells <= 25);
      CHECK(sentences <= 5);
    }

    const auto train_graphs = build_train_graphs(store, index, claims, providers, 3);
    for (const auto& g : train_graphs) {
      CHECK(g.has_gold_flags);
      CHECK(g.dimension() == 64);
    }
    const auto test_graphs = build_test_graphs(claims, sel, providers);
    const auto zero = GraphReasoner::zeros(tiny(Mode::kStl, 64));
    std::vector<std::int64_t> ids = {1, 2, 999};
    const auto preds = predict_claims(zero, test_graphs, ids);
    REQUIRE(preds.size() == 3);
    CHECK(preds[2].claim_id == 999);
    CHECK(preds[2].label == Label::kNei);
    CHECK(preds[2].evidence.empty());
  }

  TEST_CASE("explain weights") {
    Rng rng(5);
    const auto model = GraphReasoner::init(tiny(Mode::kMtl, 6), 2);
    auto single = testing::random_graph(rng, 1, 6, Label::kSupports);
    const auto one = explain(model, single);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].gate_weight == doctest::Approx(1.0));
    CHECK(one.rows[0].format() == "P_sentence_0 (1.0000)");

    auto g = testing::random_graph(rng, 6, 6, Label::kRefutes);
    g.claim_id = 12;
    const auto report = explain(model, std::vector<EvidenceGraph>{g}, 12);
    double total = 0.0, attn = 0.0;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      total += report.rows[i].gate_weight;
      attn += report.rows[i].attention_mass;
      if (i > 0) CHECK(report.rows[i - 1].gate_weight >= report.rows[i].gate_weight);
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(attn == doctest::Approx(1.0));
    CHECK(report.claim_id == 12);
    const auto text = format_report(report);
    CHECK(text.find("claim 12 predicted") == 0);
    CHECK_THROWS_AS(explain(model, std::vector<EvidenceGraph>{g}, 13), NotFoundError);
  }

  TEST_CASE("provider configuration") {
    ProviderSpec spec;
    spec.hash_seeds.clear();
    CHECK_THROWS_AS(make_providers(spec), ConfigError);
    spec.hash_seeds = {7};
    spec.dim = 0;
    CHECK_THROWS_AS(make_providers(spec), ConfigError);
    spec.dim = 16;
    const auto p = make_providers(spec);
    CHECK(p.all().size() == 1);
    CHECK(p.dimension() == 16);
  }
}
