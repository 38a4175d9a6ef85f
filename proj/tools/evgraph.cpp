// evgraph: command-line front end for the fact verification pipeline.
//
// Every stage reads and writes JSON-lines artifacts so it can be rerun in
// isolation; `run` chains them. Exit codes: 0 ok, 2 config, 3 data, 4 other.

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "evgraph/artifacts.hpp"
#include "evgraph/checkpoint.hpp"
#include "evgraph/errors.hpp"
#include "evgraph/linearizer.hpp"
#include "evgraph/pipeline.hpp"
#include "json.hpp"

namespace {

using namespace evgraph;

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  auto out = open_output(path);
  write(out);
}

template <typename T, typename F>
T read_file(const std::string& path, F&& read) {
  auto in = open_input(path);
  return read(in);
}

struct ProviderOpts {
  std::vector<std::uint64_t> seeds{0, 1};
  int dim = kDefaultEmbeddingDim;
  std::string vectors;

  void add(CLI::App* cmd) {
    cmd->add_option("--hash-seeds", seeds, "seeds of the hash encoders")->delimiter(',');
    cmd->add_option("--dim", dim, "hash embedding dimension");
    cmd->add_option("--vectors", vectors, "precomputed vector file (replaces the hash encoders)");
  }
  ProviderSpec spec() const { return {seeds, dim, vectors, 512}; }
};

struct CapOpts {
  EvidenceCaps caps;
  std::size_t mtl_cap = kMtlNodeCap;

  void add(CLI::App* cmd, bool with_mtl) {
    cmd->add_option("--cells", caps.cells, "cell budget");
    cmd->add_option("--sentences", caps.sentences, "sentence and caption budget");
    if (with_mtl) cmd->add_option("--mtl-cap", mtl_cap, "MTL node cap");
  }
};

struct TrainOpts {
  TrainConfig cfg;
  std::string mode = "stl";
  bool no_select = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "stl or mtl")->check(CLI::IsMember({"stl", "mtl"}));
    cmd->add_option("--steps", cfg.steps);
    cmd->add_option("--lr", cfg.learning_rate);
    cmd->add_option("--batch", cfg.batch_size);
    cmd->add_option("--seed", cfg.rng_seed);
    cmd->add_option("--holdout", cfg.holdout_fraction);
    cmd->add_option("--eval-every", cfg.eval_every);
    cmd->add_flag("--no-select", no_select, "keep final weights instead of the best held-out checkpoint");
    cmd->add_option("--dropout", cfg.dropout);
    cmd->add_option("--weight-decay", cfg.weight_decay);
    cmd->add_option("--hidden", cfg.model.hidden);
    cmd->add_option("--mlp-hidden", cfg.model.mlp_hidden);
    cmd->add_option("--evidence-hidden", cfg.model.evidence_hidden);
    cmd->add_option("--lambda", cfg.model.lambda);
    cmd->add_option("--train-threads", cfg.threads, "threads for gradient chunks");
  }
  TrainConfig resolved() const {
    TrainConfig c = cfg;
    c.model.mode = parse_mode(mode);
    c.select_checkpoint = !no_select;
    return c;
  }
};

std::vector<std::int64_t> claim_ids(const std::vector<ClaimRecord>& claims) {
  std::vector<std::int64_t> ids;
  for (const auto& c : claims) ids.push_back(c.claim_id);
  return ids;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evgraph: evidence graph fact verification"};
  app.set_config("--config", "", "TOML/INI file; command-line flags override its keys");
  app.require_subcommand(1);

  std::string corpus, claims, out, retrieval_path, selection_path, graphs_path, model_path, predictions_path;
  std::string mode = "stl";
  unsigned threads = 1;
  int k = kDefaultRetrievalK;
  ProviderOpts prov;
  CapOpts caps;
  TrainOpts train_opts;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a corpus (and claims) and write it normalized");
  std::string claims_out, census_out;
  ingest->add_option("--corpus", corpus)->required();
  ingest->add_option("--claims", claims);
  ingest->add_option("--out", out, "normalized corpus");
  ingest->add_option("--claims-out", claims_out);
  ingest->add_option("--census", census_out, "evidence census JSON");
  ingest->callback([&] {
    const PageStore store = load_corpus(corpus);
    std::vector<ClaimRecord> records;
    if (!claims.empty()) records = load_claims(claims, &store);
    if (!out.empty()) emit(out, [&](std::ostream& o) { write_corpus(o, store); });
    if (!claims_out.empty()) emit(claims_out, [&](std::ostream& o) { write_claims(o, records); });
    if (!census_out.empty()) {
      const CensusReport r = corpus_census(store, records);
      nlohmann::json pairs_set = nlohmann::json::array(), pairs_union = nlohmann::json::array();
      for (const auto& p : r.set_pairs) pairs_set.push_back({p.first, p.second, p.count});
      for (const auto& p : r.union_pairs) pairs_union.push_back({p.first, p.second, p.count});
      emit(census_out, [&](std::ostream& o) {
        o << nlohmann::json{{"claims", r.claims},
                            {"evidence_sets", r.evidence_sets},
                            {"type_fraction", r.type_fraction},
                            {"set_pairs", pairs_set},
                            {"union_pairs", pairs_union}}
                 .dump(2)
          << '\n';
      });
    }
    std::cout << nlohmann::json{{"pages", store.size()}, {"elements", store.all_elements().size()}, {"claims", records.size()}}
                     .dump()
              << '\n';
  });

  // linearize
  auto* lin = app.add_subcommand("linearize", "render elements as sentences");
  std::string page;
  lin->add_option("--corpus", corpus)->required();
  lin->add_option("--page", page, "restrict to one page");
  lin->add_option("--out", out);
  lin->callback([&] {
    const PageStore store = load_corpus(corpus);
    const auto ids = page.empty() ? store.all_elements() : store.elements(store.page(page));
    emit(out, [&](std::ostream& o) { write_linearized(o, store, ids); });
  });

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "rank candidate pages per claim");
  ret->add_option("--corpus", corpus)->required();
  ret->add_option("--claims", claims)->required();
  ret->add_option("--k", k)->check(CLI::PositiveNumber);
  ret->add_option("--out", out);
  ret->add_option("--threads", threads);
  ret->callback([&] {
    const PageStore store = load_corpus(corpus);
    const auto records = load_claims(claims);
    const DocIndex index = DocIndex::build(store);
    const auto results = retrieve_claims(store, index, records, k, threads);
    emit(out, [&](std::ostream& o) { write_retrieval(o, results); });
  });

  // select
  auto* sel = app.add_subcommand("select", "score and select evidence per claim");
  sel->add_option("--corpus", corpus)->required();
  sel->add_option("--claims", claims)->required();
  sel->add_option("--retrieval", retrieval_path)->required();
  sel->add_option("--mode", mode)->check(CLI::IsMember({"stl", "mtl"}));
  sel->add_option("--out", out);
  sel->add_option("--threads", threads);
  prov.add(sel);
  caps.add(sel, true);
  sel->callback([&] {
    const PageStore store = load_corpus(corpus);
    const auto records = load_claims(claims, &store);
    const auto retrieval = read_file<std::vector<RetrievalResult>>(retrieval_path, read_retrieval);
    const Providers providers = make_providers(prov.spec());
    const auto selections =
        select_evidence(store, records, retrieval, providers, parse_mode(mode), caps.caps, caps.mtl_cap, threads);
    emit(out, [&](std::ostream& o) { write_selection(o, records, selections); });
  });

  // augment
  auto* aug = app.add_subcommand("augment", "add NOT ENOUGH INFO claims");
  AugmentationConfig aug_cfg;
  std::string lexicon;
  aug->add_option("--corpus", corpus)->required();
  aug->add_option("--claims", claims)->required();
  aug->add_option("--reduction", aug_cfg.n_reduction);
  aug->add_option("--mutation", aug_cfg.n_mutation);
  aug->add_option("--seed", aug_cfg.rng_seed);
  aug->add_option("--lexicon", lexicon, "surface<TAB>replacement file");
  aug->add_option("--out", out);
  aug->callback([&] {
    const PageStore store = load_corpus(corpus);
    const auto records = load_claims(claims, &store);
    if (!lexicon.empty()) aug_cfg.entity_lexicon = load_lexicon(lexicon);
    const auto augmented = augment_nei(records, store, aug_cfg);
    emit(out, [&](std::ostream& o) { write_claims(o, augmented); });
  });

  // build-graphs
  auto* bg = app.add_subcommand("build-graphs", "build evidence graphs with node features");
  std::string split = "train", dump;
  bg->add_option("--corpus", corpus)->required();
  bg->add_option("--claims", claims)->required();
  bg->add_option("--split", split, "train: gold plus top-ranked nodes; test: the selection")
      ->check(CLI::IsMember({"train", "test"}));
  bg->add_option("--selection", selection_path, "required for --split test");
  bg->add_option("--k", k)->check(CLI::PositiveNumber);
  bg->add_option("--out", out);
  bg->add_option("--dump", dump, "debug dump of node ids, gold flags and feature norms");
  bg->add_option("--threads", threads);
  prov.add(bg);
  bg->callback([&] {
    const PageStore store = load_corpus(corpus);
    const auto records = load_claims(claims, &store);
    const Providers providers = make_providers(prov.spec());
    std::vector<EvidenceGraph> graphs;
    if (split == "train") {
      graphs = build_train_graphs(store, DocIndex::build(store), records, providers, k, threads);
    } else {
      if (selection_path.empty()) throw ConfigError("--split test needs --selection");
      auto in = open_input(selection_path);
      graphs = build_test_graphs(records, read_selection(in, store), providers, threads);
    }
    emit(out, [&](std::ostream& o) { write_graphs(o, graphs); });
    if (!dump.empty()) emit(dump, [&](std::ostream& o) { write_graph_dump(o, graphs); });
  });

  // train
  auto* tr = app.add_subcommand("train", "train the graph reasoner");
  std::string log_path;
  tr->add_option("--graphs", graphs_path)->required();
  tr->add_option("--out", model_path, "checkpoint")->required();
  tr->add_option("--log", log_path, "step log CSV");
  train_opts.add(tr);
  tr->callback([&] {
    const auto graphs = read_file<std::vector<EvidenceGraph>>(graphs_path, read_graphs);
    if (graphs.empty()) throw DataError("no graphs in " + graphs_path);
    TrainConfig cfg = train_opts.resolved();
    cfg.model.input_dim = graphs.front().dimension();
    const auto result = train(GraphReasoner::init(cfg.model, cfg.rng_seed), graphs, cfg);
    save_checkpoint(model_path, result.model, result.best_step);
    if (!log_path.empty()) emit(log_path, [&](std::ostream& o) { write_step_log(o, result.log); });
    std::cout << nlohmann::json{{"best_step", result.best_step}, {"graphs", graphs.size()}}.dump() << '\n';
  });

  // predict
  auto* pr = app.add_subcommand("predict", "predict labels and evidence");
  pr->add_option("--graphs", graphs_path)->required();
  pr->add_option("--model", model_path)->required();
  pr->add_option("--claims", claims, "claims to cover; claims without a graph get NOT ENOUGH INFO");
  pr->add_option("--out", out);
  pr->add_option("--threads", threads);
  caps.add(pr, false);
  pr->callback([&] {
    const auto graphs = read_file<std::vector<EvidenceGraph>>(graphs_path, read_graphs);
    const Checkpoint ckpt = load_checkpoint(model_path);
    std::vector<std::int64_t> ids;
    if (!claims.empty()) {
      ids = claim_ids(load_claims(claims));
    } else {
      for (const auto& g : graphs) ids.push_back(g.claim_id);
    }
    const auto preds = predict_claims(ckpt.model, graphs, ids, caps.caps, threads);
    emit(out, [&](std::ostream& o) { write_predictions(o, preds); });
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score predictions against gold claims");
  ev->add_option("--predictions", predictions_path)->required();
  ev->add_option("--claims", claims)->required();
  ev->add_option("--out", out);
  caps.add(ev, false);
  ev->callback([&] {
    const auto preds = read_file<std::vector<Prediction>>(predictions_path, read_predictions);
    const auto gold = load_claims(claims);
    const auto report = evaluate(preds, gold, caps.caps);
    emit(out, [&](std::ostream& o) { o << report.to_json() << '\n'; });
  });

  // explain
  auto* ex = app.add_subcommand("explain", "pooling and attention weights for one claim");
  std::int64_t claim_id = 0;
  ex->add_option("--graphs", graphs_path)->required();
  ex->add_option("--model", model_path)->required();
  ex->add_option("--claim", claim_id)->required();
  ex->callback([&] {
    const auto graphs = read_file<std::vector<EvidenceGraph>>(graphs_path, read_graphs);
    const Checkpoint ckpt = load_checkpoint(model_path);
    std::cout << format_report(explain(ckpt.model, graphs, claim_id));
  });

  // run
  auto* run = app.add_subcommand("run", "all stages end to end");
  PipelineConfig pcfg;
  run->add_option("--corpus", pcfg.corpus_path)->required();
  run->add_option("--claims", pcfg.claims_path)->required();
  run->add_option("--eval-claims", pcfg.eval_claims_path);
  run->add_option("--lexicon", pcfg.lexicon_path);
  run->add_option("--out-dir", pcfg.output_dir)->required();
  run->add_option("--k", pcfg.retrieval_k)->check(CLI::PositiveNumber);
  run->add_option("--reduction", pcfg.augment.n_reduction);
  run->add_option("--mutation", pcfg.augment.n_mutation);
  run->add_option("--augment-seed", pcfg.augment.rng_seed);
  run->add_option("--threads", pcfg.threads);
  prov.add(run);
  caps.add(run, true);
  train_opts.add(run);
  run->callback([&] {
    pcfg.provider = prov.spec();
    pcfg.stl_caps = caps.caps;
    pcfg.mtl_cap = caps.mtl_cap;
    pcfg.train = train_opts.resolved();
    pcfg.mode = pcfg.train.model.mode;
    const auto result = run_pipeline(pcfg);
    std::cout << result.metrics.to_json() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
