#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evgraph/corpus.hpp"
#include "evgraph/embedding.hpp"

namespace evgraph {

// A candidate evidence element with its linearized sequence.
struct EvidenceItem {
  ElementId id;
  std::string sequence;
  std::string text;  // raw element text; empty items are never scored
};

struct ScoredEvidence {
  ElementId id;
  std::string sequence;
  double score = 0.0;
};

// Every enumerable element of the given pages, linearized. Unknown pages are
// skipped.
std::vector<EvidenceItem> collect_items(const PageStore& store, const std::vector<std::string>& pages);
EvidenceItem make_item(const PageStore& store, const ElementId& id);

// Mean over providers of cosine(encode_text(claim), encode_text(sequence)),
// sorted by descending score with ties broken by canonical id string.
std::vector<ScoredEvidence> score_evidence(const std::vector<const EmbeddingProvider*>& providers,
                                           std::string_view claim, const std::vector<EvidenceItem>& items);

struct EvidenceCaps {
  std::size_t cells = 25;
  std::size_t sentences = 5;
};
inline constexpr std::size_t kMtlNodeCap = 35;

// Drops header cells and list items, then keeps the top `cells` cells and top
// `sentences` sentences/captions. Output keeps ranked order.
std::vector<ScoredEvidence> select_test_stl(const std::vector<ScoredEvidence>& ranked, EvidenceCaps caps = {});

// Top `cap` items of any kind.
std::vector<ScoredEvidence> select_test_mtl(const std::vector<ScoredEvidence>& ranked, std::size_t cap = kMtlNodeCap);

// Training node rule-set: all gold items, plus the top four ranked
// candidates when there are fewer than two gold items, else the top |gold|.
// Gold ids come first in the given order, then ranked additions. Throws
// DataError when both inputs are empty.
std::vector<ElementId> select_train_nodes(const std::vector<ElementId>& gold,
                                          const std::vector<ScoredEvidence>& ranked);

struct AugmentationConfig {
  std::size_t n_reduction = 15000;
  std::size_t n_mutation = 5946;
  std::uint64_t rng_seed = 0;
  std::vector<std::pair<std::string, std::string>> entity_lexicon;
};

// Tab-separated "surface<TAB>replacement" lines; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> load_lexicon(const std::string& path);

// Returns the input followed by cfg.n_reduction evidence-reduction NEI records
// and cfg.n_mutation entity-substitution NEI records, with fresh ids after the
// largest input id. Throws DataError when no source claim is eligible for a
// requested strategy.
std::vector<ClaimRecord> augment_nei(const std::vector<ClaimRecord>& claims, const PageStore& store,
                                     const AugmentationConfig& cfg);

}  // namespace evgraph
