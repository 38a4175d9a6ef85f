#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "evgraph/artifacts.hpp"
#include "evgraph/embedding.hpp"
#include "evgraph/evidence.hpp"
#include "evgraph/metrics.hpp"
#include "evgraph/retrieval.hpp"
#include "evgraph/trainer.hpp"

namespace evgraph {

// Either a set of hash encoders (one per seed) or a single precomputed vector
// file. Node features always come from the first provider.
struct ProviderSpec {
  std::vector<std::uint64_t> hash_seeds{0, 1};  // two encoders, as an ensemble
  int dim = kDefaultEmbeddingDim;
  std::string vector_file;
  int max_seq_len = 512;  // honored by external vector generators
};

struct Providers {
  std::vector<std::unique_ptr<EmbeddingProvider>> owned;

  std::vector<const EmbeddingProvider*> all() const;
  const EmbeddingProvider& feature() const { return *owned.front(); }
  int dimension() const { return owned.front()->dimension(); }
};

// Throws ConfigError for an empty seed list or non-positive dimension.
Providers make_providers(const ProviderSpec& spec);

struct PipelineConfig {
  std::string corpus_path;
  std::string claims_path;       // training claims
  std::string eval_claims_path;  // predicted and scored; defaults to claims_path
  std::string lexicon_path;      // empty: numeric substitution only
  std::string output_dir;
  Mode mode = Mode::kStl;
  int retrieval_k = kDefaultRetrievalK;
  EvidenceCaps stl_caps;
  std::size_t mtl_cap = kMtlNodeCap;
  ProviderSpec provider;
  TrainConfig train;
  AugmentationConfig augment;
  unsigned threads = 1;  // claim-level parallelism; output order is fixed
};

// Stage functions. Each is deterministic for any thread count and returns
// results in input order.

std::vector<RetrievalResult> retrieve_claims(const PageStore& store, const DocIndex& index,
                                             const std::vector<ClaimRecord>& claims, int k, unsigned threads = 1);

// Ranked candidate evidence from the retrieved pages.
std::vector<ScoredEvidence> rank_claim_evidence(const PageStore& store, const std::vector<std::string>& pages,
                                                const Providers& providers, const std::string& claim);

// Test-time selection: STL caps without header cells or list items, or the
// MTL node cap.
std::vector<Selection> select_evidence(const PageStore& store, const std::vector<ClaimRecord>& claims,
                                       const std::vector<RetrievalResult>& retrieval, const Providers& providers,
                                       Mode mode, EvidenceCaps caps, std::size_t mtl_cap, unsigned threads = 1);

// Training graphs: retrieval and ranking per distinct claim text, nodes from
// the gold-plus-top-ranked rule, gold flags from the union of gold sets.
// Claims with no node at all are skipped.
std::vector<EvidenceGraph> build_train_graphs(const PageStore& store, const DocIndex& index,
                                              const std::vector<ClaimRecord>& claims, const Providers& providers,
                                              int k, unsigned threads = 1);

// Test graphs in selection order; claims with an empty selection get none.
std::vector<EvidenceGraph> build_test_graphs(const std::vector<ClaimRecord>& claims,
                                             const std::vector<Selection>& selections, const Providers& providers,
                                             unsigned threads = 1);

// One prediction per claim id in `claim_ids`. Claims without a graph are
// NOT ENOUGH INFO with no evidence. STL evidence is the graph's nodes; MTL
// evidence is nodes with probability >= 0.5. Both pass through the limits.
std::vector<Prediction> predict_claims(const GraphReasoner& model, const std::vector<EvidenceGraph>& graphs,
                                       const std::vector<std::int64_t>& claim_ids, EvidenceCaps caps = {},
                                       unsigned threads = 1);

struct ExplainRow {
  ElementId id;
  double gate_weight = 0.0;      // pooling softmax
  double attention_mass = 0.0;   // mean incoming first-layer attention
  bool gold = false;

  // "<id> (0.1794)"
  std::string format() const;
};

struct ExplainReport {
  std::int64_t claim_id = 0;
  Label predicted = Label::kNei;
  std::vector<ExplainRow> rows;  // by descending gate weight, ties by id
};

ExplainReport explain(const GraphReasoner& model, const EvidenceGraph& graph);
// Throws NotFoundError(kIndex) for an unknown claim id.
ExplainReport explain(const GraphReasoner& model, const std::vector<EvidenceGraph>& graphs, std::int64_t claim_id);
std::string format_report(const ExplainReport& report);

struct PipelineResult {
  std::vector<Prediction> predictions;
  EvaluationReport metrics;
  double retrieval_recall = 0.0;  // Recall@k over eval claims with gold pages
};

// Runs every stage and writes into output_dir: corpus.jsonl,
// linearized.jsonl, retrieval.jsonl, selection.jsonl, augmented.jsonl,
// train_graphs.jsonl, test_graphs.jsonl, model.ckpt, steps.csv,
// predictions.jsonl and metrics.json. Missing inputs raise ConfigError before
// any work; a failing stage rethrows with the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace evgraph
