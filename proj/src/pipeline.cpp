#include "evgraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "evgraph/checkpoint.hpp"
#include "evgraph/errors.hpp"
#include "json.hpp"

namespace evgraph {
namespace {

namespace fs = std::filesystem;

// Work items are claimed from a shared counter; each writes only its own slot.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (t == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < t; ++w)
      pool.emplace_back([&]() {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            f(i);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> page_ids(const std::vector<ScoredPage>& pages) {
  std::vector<std::string> out;
  for (const auto& p : pages) out.push_back(p.page_id);
  return out;
}

std::vector<std::string> gold_pages(const ClaimRecord& c) {
  std::set<std::string> pages;
  for (const auto& id : c.evidence_union()) pages.insert(id.page);
  return {pages.begin(), pages.end()};
}

std::vector<EvidenceItem> as_items(const std::vector<ScoredEvidence>& ranked) {
  std::vector<EvidenceItem> out;
  for (const auto& s : ranked) out.push_back({s.id, s.sequence, s.sequence});
  return out;
}

// Rethrows with the stage name prefixed, keeping the error category.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(name) + ": ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const MissingKeyError& e) {
    throw MissingKeyError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

}  // namespace

std::vector<const EmbeddingProvider*> Providers::all() const {
  std::vector<const EmbeddingProvider*> out;
  for (const auto& p : owned) out.push_back(p.get());
  return out;
}

Providers make_providers(const ProviderSpec& spec) {
  Providers p;
  if (!spec.vector_file.empty()) {
    p.owned.push_back(load_precomputed(spec.vector_file));
    return p;
  }
  if (spec.hash_seeds.empty()) throw ConfigError("at least one hash seed is required");
  if (spec.dim <= 0) throw ConfigError("embedding dimension must be positive");
  for (auto seed : spec.hash_seeds) p.owned.push_back(std::make_unique<HashEmbedding>(spec.dim, seed));
  return p;
}

std::vector<RetrievalResult> retrieve_claims(const PageStore& store, const DocIndex& index,
                                             const std::vector<ClaimRecord>& claims, int k, unsigned threads) {
  std::vector<RetrievalResult> out(claims.size());
  LocalTitleSearch search(store);  // read-only after construction
  parallel_for(claims.size(), threads, [&](std::size_t i) {
    const auto candidates = candidate_pages(index, &search, claims[i].claim);
    out[i] = {claims[i].claim_id, rank_pages(index, claims[i].claim, candidates.pages, k)};
  });
  return out;
}

std::vector<ScoredEvidence> rank_claim_evidence(const PageStore& store, const std::vector<std::string>& pages,
                                                const Providers& providers, const std::string& claim) {
  return score_evidence(providers.all(), claim, collect_items(store, pages));
}

std::vector<Selection> select_evidence(const PageStore& store, const std::vector<ClaimRecord>& claims,
                                       const std::vector<RetrievalResult>& retrieval, const Providers& providers,
                                       Mode mode, EvidenceCaps caps, std::size_t mtl_cap, unsigned threads) {
  if (claims.size() != retrieval.size()) throw DataError("retrieval and claims differ in length");
  std::vector<Selection> out(claims.size());
  parallel_for(claims.size(), threads, [&](std::size_t i) {
    if (claims[i].claim_id != retrieval[i].claim_id)
      throw DataError("retrieval out of order at claim " + std::to_string(claims[i].claim_id));
    const auto ranked = rank_claim_evidence(store, page_ids(retrieval[i].pages), providers, claims[i].claim);
    out[i] = {claims[i].claim_id, mode == Mode::kStl ? select_test_stl(ranked, caps) : select_test_mtl(ranked, mtl_cap)};
  });
  return out;
}

std::vector<EvidenceGraph> build_train_graphs(const PageStore& store, const DocIndex& index,
                                              const std::vector<ClaimRecord>& claims, const Providers& providers,
                                              int k, unsigned threads) {
  // Reduction-built records repeat their source claim text; rank each text once.
  std::map<std::string, std::size_t> text_slot;
  std::vector<std::string> texts;
  for (const auto& c : claims)
    if (text_slot.emplace(c.claim, texts.size()).second) texts.push_back(c.claim);
  std::vector<std::vector<ScoredEvidence>> ranked(texts.size());
  LocalTitleSearch search(store);
  parallel_for(texts.size(), threads, [&](std::size_t i) {
    const auto candidates = candidate_pages(index, &search, texts[i]);
    ranked[i] = rank_claim_evidence(store, page_ids(rank_pages(index, texts[i], candidates.pages, k)), providers, texts[i]);
  });

  std::vector<std::optional<EvidenceGraph>> built(claims.size());
  parallel_for(claims.size(), threads, [&](std::size_t i) {
    const auto& c = claims[i];
    const auto gold = c.evidence_union();
    const auto& r = ranked[text_slot.at(c.claim)];
    if (gold.empty() && r.empty()) return;
    std::vector<EvidenceItem> items;
    for (const auto& id : select_train_nodes(gold, r)) items.push_back(make_item(store, id));
    built[i] = build_graph(c.claim_id, c.claim, items, providers.feature(), &gold, c.label);
  });
  std::vector<EvidenceGraph> out;
  for (auto& g : built)
    if (g) out.push_back(std::move(*g));
  return out;
}

std::vector<EvidenceGraph> build_test_graphs(const std::vector<ClaimRecord>& claims,
                                             const std::vector<Selection>& selections, const Providers& providers,
                                             unsigned threads) {
  if (claims.size() != selections.size()) throw DataError("selection and claims differ in length");
  std::vector<std::optional<EvidenceGraph>> built(claims.size());
  parallel_for(claims.size(), threads, [&](std::size_t i) {
    const auto& c = claims[i];
    if (c.claim_id != selections[i].claim_id)
      throw DataError("selection out of order at claim " + std::to_string(c.claim_id));
    if (selections[i].items.empty()) return;
    const auto gold = c.evidence_union();
    built[i] = build_graph(c.claim_id, c.claim, as_items(selections[i].items), providers.feature(), &gold, c.label);
  });
  std::vector<EvidenceGraph> out;
  for (auto& g : built)
    if (g) out.push_back(std::move(*g));
  return out;
}

std::vector<Prediction> predict_claims(const GraphReasoner& model, const std::vector<EvidenceGraph>& graphs,
                                       const std::vector<std::int64_t>& claim_ids, EvidenceCaps caps,
                                       unsigned threads) {
  std::map<std::int64_t, const EvidenceGraph*> by_id;
  for (const auto& g : graphs)
    if (!by_id.emplace(g.claim_id, &g).second) throw DataError("duplicate graph for claim " + std::to_string(g.claim_id));
  std::vector<Prediction> out(claim_ids.size());
  parallel_for(claim_ids.size(), threads, [&](std::size_t i) {
    Prediction& p = out[i];
    p.claim_id = claim_ids[i];
    auto it = by_id.find(claim_ids[i]);
    if (it == by_id.end()) return;
    const EvidenceGraph& g = *it->second;
    p.label = model.predict_veracity(g).label();
    std::vector<ScoredId> scored;
    if (model.mode() == Mode::kMtl) {
      const Eigen::VectorXd probs = model.predict_evidence_nodes(g);
      for (std::size_t n = 0; n < g.size(); ++n)
        if (probs(static_cast<Eigen::Index>(n)) >= 0.5) scored.push_back({g.nodes[n].id, probs(static_cast<Eigen::Index>(n))});
    } else {
      for (std::size_t n = 0; n < g.size(); ++n) scored.push_back({g.nodes[n].id, -static_cast<double>(n)});
    }
    p.evidence = enforce_limits(std::move(scored), caps);
  });
  return out;
}

std::string ExplainRow::format() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, " (%.4f)", gate_weight);
  return id.str() + buf;
}

ExplainReport explain(const GraphReasoner& model, const EvidenceGraph& graph) {
  const VeracityPrediction pred = model.predict_veracity(graph);
  ExplainReport report;
  report.claim_id = graph.claim_id;
  report.predicted = pred.label();
  const auto n = static_cast<Eigen::Index>(graph.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& node = graph.nodes[static_cast<std::size_t>(j)];
    report.rows.push_back({node.id, pred.gate_weights(j), pred.first_layer_attention.col(j).mean(), node.gold});
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ExplainRow& a, const ExplainRow& b) {
    if (a.gate_weight != b.gate_weight) return a.gate_weight > b.gate_weight;
    return a.id.str() < b.id.str();
  });
  return report;
}

ExplainReport explain(const GraphReasoner& model, const std::vector<EvidenceGraph>& graphs, std::int64_t claim_id) {
  for (const auto& g : graphs)
    if (g.claim_id == claim_id) return explain(model, g);
  throw NotFoundError(NotFoundError::Reason::kIndex, "no graph for claim " + std::to_string(claim_id));
}

std::string format_report(const ExplainReport& report) {
  std::ostringstream out;
  out << "claim " << report.claim_id << " predicted " << label_name(report.predicted) << '\n';
  out << "gold  evidence (pool gate weight)  first-layer attention\n";
  for (const auto& r : report.rows) {
    char attn[32];
    std::snprintf(attn, sizeof attn, "%.4f", r.attention_mass);
    out << (r.gold ? "  *   " : "      ") << r.format() << "  " << attn << '\n';
  }
  return out.str();
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  require_file(cfg.corpus_path, "corpus");
  require_file(cfg.claims_path, "claims");
  if (!cfg.eval_claims_path.empty()) require_file(cfg.eval_claims_path, "eval claims");
  if (!cfg.lexicon_path.empty()) require_file(cfg.lexicon_path, "lexicon");
  if (!cfg.provider.vector_file.empty()) require_file(cfg.provider.vector_file, "vector file");
  if (cfg.output_dir.empty()) throw ConfigError("output directory is required");
  if (cfg.retrieval_k <= 0) throw ConfigError("retrieval k must be positive");
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
  const fs::path dir(cfg.output_dir);
  auto out_file = [&](const char* name) { return open_output((dir / name).string()); };

  PipelineResult result;
  PageStore store;
  std::vector<ClaimRecord> train_claims, eval_claims;
  stage("ingest", [&] {
    store = load_corpus(cfg.corpus_path);
    train_claims = load_claims(cfg.claims_path, &store);
    eval_claims = cfg.eval_claims_path.empty() ? train_claims : load_claims(cfg.eval_claims_path, &store);
    auto out = out_file("corpus.jsonl");
    write_corpus(out, store);
  });

  stage("linearize", [&] {
    auto out = out_file("linearized.jsonl");
    write_linearized(out, store, store.all_elements());
  });

  DocIndex index;
  std::vector<RetrievalResult> retrieval;
  stage("retrieve", [&] {
    index = DocIndex::build(store);
    retrieval = retrieve_claims(store, index, eval_claims, cfg.retrieval_k, cfg.threads);
    auto out = out_file("retrieval.jsonl");
    write_retrieval(out, retrieval);
    std::vector<std::vector<std::string>> ranked, gold;
    for (std::size_t i = 0; i < eval_claims.size(); ++i) {
      auto g = gold_pages(eval_claims[i]);
      if (g.empty()) continue;
      ranked.push_back(page_ids(retrieval[i].pages));
      gold.push_back(std::move(g));
    }
    if (!gold.empty()) result.retrieval_recall = recall_at_k(ranked, gold, cfg.retrieval_k);
    auto rm = out_file("retrieval_metrics.json");
    rm << nlohmann::json{{"k", cfg.retrieval_k}, {"recall_at_k", result.retrieval_recall}, {"n", gold.size()}}.dump()
       << '\n';
  });

  Providers providers;
  std::vector<Selection> selections;
  stage("select", [&] {
    providers = make_providers(cfg.provider);
    selections = select_evidence(store, eval_claims, retrieval, providers, cfg.mode, cfg.stl_caps, cfg.mtl_cap, cfg.threads);
    auto out = out_file("selection.jsonl");
    write_selection(out, eval_claims, selections);
  });

  std::vector<ClaimRecord> augmented;
  stage("augment", [&] {
    AugmentationConfig aug = cfg.augment;
    if (!cfg.lexicon_path.empty()) aug.entity_lexicon = load_lexicon(cfg.lexicon_path);
    augmented = aug.n_reduction + aug.n_mutation == 0 ? train_claims : augment_nei(train_claims, store, aug);
    auto out = out_file("augmented.jsonl");
    write_claims(out, augmented);
  });

  std::vector<EvidenceGraph> train_graphs, test_graphs;
  stage("build-graphs", [&] {
    train_graphs = build_train_graphs(store, index, augmented, providers, cfg.retrieval_k, cfg.threads);
    test_graphs = build_test_graphs(eval_claims, selections, providers, cfg.threads);
    auto tr = out_file("train_graphs.jsonl");
    write_graphs(tr, train_graphs);
    auto te = out_file("test_graphs.jsonl");
    write_graphs(te, test_graphs);
  });

  GraphReasoner model;
  stage("train", [&] {
    TrainConfig tc = cfg.train;
    tc.model.mode = cfg.mode;
    tc.model.input_dim = providers.dimension();
    auto trained = train(GraphReasoner::init(tc.model, tc.rng_seed), train_graphs, tc);
    model = std::move(trained.model);
    save_checkpoint((dir / "model.ckpt").string(), model, trained.best_step);
    auto log = out_file("steps.csv");
    write_step_log(log, trained.log);
  });

  stage("predict", [&] {
    std::vector<std::int64_t> ids;
    for (const auto& c : eval_claims) ids.push_back(c.claim_id);
    result.predictions = predict_claims(model, test_graphs, ids, cfg.stl_caps, cfg.threads);
    auto out = out_file("predictions.jsonl");
    write_predictions(out, result.predictions);
  });

  stage("evaluate", [&] {
    result.metrics = evaluate(result.predictions, eval_claims, cfg.stl_caps);
    auto out = out_file("metrics.json");
    out << result.metrics.to_json() << '\n';
  });
  return result;
}

}  // namespace evgraph
