#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evgraph/corpus.hpp"
#include "evgraph/evidence.hpp"
#include "evgraph/graph.hpp"
#include "evgraph/metrics.hpp"
#include "evgraph/retrieval.hpp"

namespace evgraph {

// JSON-lines readers and writers for every intermediate artifact. Readers
// throw IngestError with the 1-based line number; blank lines are skipped.

// {"id": str, "text": str}
void write_linearized(std::ostream& out, const PageStore& store, const std::vector<ElementId>& ids);

struct RetrievalResult {
  std::int64_t claim_id = 0;
  std::vector<ScoredPage> pages;
};

// {"id": int, "pages": [str], "scores": [float]}
void write_retrieval(std::ostream& out, const std::vector<RetrievalResult>& results);
std::vector<RetrievalResult> read_retrieval(std::istream& in);

struct Selection {
  std::int64_t claim_id = 0;
  std::vector<ScoredEvidence> items;  // ranked
};

// A claims record extended with "selected": [str] and "scores": [float], so
// the file also loads as plain claims.
void write_selection(std::ostream& out, const std::vector<ClaimRecord>& claims, const std::vector<Selection>& sel);
// Sequences are re-linearized from the store.
std::vector<Selection> read_selection(std::istream& in, const PageStore& store);

// {"claim_id": int, "claim": str, "label": str|null, "has_gold": bool,
//  "nodes": [{"id": str, "sequence": str, "gold": bool, "feature": [f]}]}
// Features round-trip exactly.
void write_graphs(std::ostream& out, const std::vector<EvidenceGraph>& graphs);
std::vector<EvidenceGraph> read_graphs(std::istream& in);

// One JSON document per graph: node ids, gold flags and feature norms.
void write_graph_dump(std::ostream& out, const std::vector<EvidenceGraph>& graphs);

// {"id": int, "predicted_label": str, "predicted_evidence": [str]}
void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(std::istream& in);

// Opens for reading or writing; throws ConfigError when the path is unusable.
std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

}  // namespace evgraph
