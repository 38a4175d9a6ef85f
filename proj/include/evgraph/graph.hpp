#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evgraph/corpus.hpp"
#include "evgraph/embedding.hpp"
#include "evgraph/evidence.hpp"

namespace evgraph {

struct GraphNode {
  ElementId id;
  std::string sequence;
  Vector feature;  // encode_pair(claim, sequence)
  bool gold = false;
};

// Evidence reasoning graph: complete with self-loops, so edges are implicit
// and every node attends to every node including itself.
struct EvidenceGraph {
  std::int64_t claim_id = 0;
  std::string claim;
  std::vector<GraphNode> nodes;
  std::optional<Label> label;
  bool has_gold_flags = false;

  std::size_t size() const { return nodes.size(); }
  std::size_t edge_count() const { return nodes.size() * nodes.size(); }
  int dimension() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().feature.size()); }
  // n x d matrix with node features as rows.
  Eigen::MatrixXd feature_matrix() const;
};

// Node i gets provider.encode_pair(claim, sequence_i); order follows
// `selected`. When `gold` is supplied, nodes in it are flagged. Throws
// DataError on an empty selection.
EvidenceGraph build_graph(std::int64_t claim_id, const std::string& claim, const std::vector<EvidenceItem>& selected,
                          const EmbeddingProvider& provider, const std::vector<ElementId>* gold = nullptr,
                          std::optional<Label> label = std::nullopt);

// Every neighborhood is the full node set, in node order.
std::vector<std::vector<int>> neighborhoods(const EvidenceGraph& g);

// Node i of the result is node perm[i] of g.
EvidenceGraph permute_nodes(const EvidenceGraph& g, const std::vector<int>& perm);

}  // namespace evgraph
